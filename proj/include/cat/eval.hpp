#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <boost/math/distributions/students_t.hpp>

#include "cat/error.hpp"
#include "cat/models.hpp"
#include "cat/text.hpp"

namespace cat {

struct MetricRecord {
  std::string id;
  bool flipped = false;
  // Present only when a contrast was produced.
  std::optional<double> dist;
  std::optional<double> cont;
  std::optional<double> fluency;
};

inline double flip_rate(std::span<const MetricRecord> records) {
  if (records.empty()) throw Error(Errc::empty_evaluation, "flip rate over zero instances");
  std::size_t flips = 0;
  for (const auto& r : records) flips += r.flipped ? 1 : 0;
  return static_cast<double>(flips) / static_cast<double>(records.size());
}

inline double cosine_similarity(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw Error(Errc::degenerate_embedding, "embedding dimensions differ");
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 || nb == 0.0) throw Error(Errc::degenerate_embedding, "zero-norm embedding");
  if (std::equal(a.begin(), a.end(), b.begin())) return 1.0;
  return std::clamp(dot / (std::sqrt(na) * std::sqrt(nb)), -1.0, 1.0);
}

inline double content_preservation(const Embedder& embedder, const TokenizedText& x, const TokenizedText& x_prime) {
  const auto a = embedder.embed(x);
  const auto b = embedder.embed(x_prime);
  return cosine_similarity(a, b);
}

inline double fluency_ratio(const FluencyModel& lm, const TokenizedText& x, const TokenizedText& x_prime) {
  const double base = lm.lm_loss(x);
  if (!(base > 0.0) || !std::isfinite(base)) throw Error(Errc::degenerate_loss, "input loss is not positive");
  if (x == x_prime) return 1.0;
  return lm.lm_loss(x_prime) / base;
}

struct MetricBackends {
  const Embedder& embedder;
  const FluencyModel& fluency;
};

/// Dist/Cont/Fluency for one produced contrast.
inline MetricRecord measure(const MetricBackends& b, std::string id, const TokenizedText& x,
                            const TokenizedText& x_prime, bool flipped) {
  MetricRecord r;
  r.id = std::move(id);
  r.flipped = flipped;
  r.dist = normalized_levenshtein(x, x_prime);
  r.cont = content_preservation(b.embedder, x, x_prime);
  r.fluency = fluency_ratio(b.fluency, x, x_prime);
  return r;
}

struct Summary {
  std::size_t n = 0;
  double mean = 0.0;
  std::optional<double> stddev;  // sample std (n-1); absent for n < 2
};

inline Summary summarize(std::span<const double> values) {
  Summary s;
  s.n = values.size();
  if (values.empty()) return s;
  double sum = 0.0;
  for (double v : values) sum += v;
  s.mean = sum / static_cast<double>(s.n);
  // A constant sequence must report its value exactly.
  if (std::all_of(values.begin(), values.end(), [&](double v) { return v == values[0]; })) s.mean = values[0];
  if (s.n >= 2) {
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.stddev = std::sqrt(ss / static_cast<double>(s.n - 1));
  }
  return s;
}

struct AggregateReport {
  std::size_t instances = 0;
  std::size_t produced = 0;
  double flip_rate = 0.0;
  Summary dist, cont, fluency;
};

/// Flip rate over all instances; the other metrics over produced contrasts.
inline AggregateReport aggregate(std::span<const MetricRecord> records) {
  AggregateReport out;
  out.instances = records.size();
  out.flip_rate = flip_rate(records);
  std::vector<double> d, c, f;
  for (const auto& r : records) {
    if (r.dist) d.push_back(*r.dist);
    if (r.cont) c.push_back(*r.cont);
    if (r.fluency) f.push_back(*r.fluency);
  }
  out.produced = d.size();
  out.dist = summarize(d);
  out.cont = summarize(c);
  out.fluency = summarize(f);
  return out;
}

struct TTestResult {
  double t = 0.0;
  double p = 1.0;
  double df = 0.0;
};

namespace detail {

inline double two_sided_p(double t, double df) {
  if (std::isinf(t)) return 0.0;
  boost::math::students_t_distribution<double> dist(df);
  return 2.0 * boost::math::cdf(dist, -std::abs(t));
}

}  // namespace detail

/// Classical paired t-test on a - b with n-1 degrees of freedom.
/// All-zero differences give (0, 1); zero variance with a nonzero mean gives
/// (+-inf, 0).
inline TTestResult paired_t_test(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw Error(Errc::unpaired_inputs, "paired samples differ in length");
  if (a.size() < 2) throw Error(Errc::unpaired_inputs, "paired t-test needs at least two pairs");
  const std::size_t n = a.size();
  std::vector<double> d(n);
  for (std::size_t i = 0; i < n; ++i) d[i] = a[i] - b[i];
  TTestResult r;
  r.df = static_cast<double>(n - 1);
  const Summary s = summarize(d);
  if (s.mean == 0.0 && std::all_of(d.begin(), d.end(), [](double v) { return v == 0.0; })) return r;
  const double sd = *s.stddev;
  if (sd == 0.0) {
    r.t = s.mean > 0.0 ? std::numeric_limits<double>::infinity() : -std::numeric_limits<double>::infinity();
    r.p = 0.0;
    return r;
  }
  r.t = s.mean / (sd / std::sqrt(static_cast<double>(n)));
  r.p = detail::two_sided_p(r.t, r.df);
  return r;
}

/// Unpaired Welch t-test with Welch-Satterthwaite degrees of freedom.
inline TTestResult welch_t_test(std::span<const double> a, std::span<const double> b) {
  if (a.size() < 2 || b.size() < 2) throw Error(Errc::unpaired_inputs, "Welch t-test needs two values per side");
  const Summary sa = summarize(a), sb = summarize(b);
  const double va = *sa.stddev * *sa.stddev / static_cast<double>(sa.n);
  const double vb = *sb.stddev * *sb.stddev / static_cast<double>(sb.n);
  const double diff = sa.mean - sb.mean;
  TTestResult r;
  if (va + vb == 0.0) {
    r.df = static_cast<double>(sa.n + sb.n - 2);
    if (diff == 0.0) return r;
    r.t = diff > 0.0 ? std::numeric_limits<double>::infinity() : -std::numeric_limits<double>::infinity();
    r.p = 0.0;
    return r;
  }
  r.t = diff / std::sqrt(va + vb);
  r.df = (va + vb) * (va + vb) /
         (va * va / static_cast<double>(sa.n - 1) + vb * vb / static_cast<double>(sb.n - 1));
  r.p = detail::two_sided_p(r.t, r.df);
  return r;
}

enum class TestKind { paired, welch };

struct MetricComparison {
  std::string metric;
  std::size_t pairs = 0;
  double mean_a = 0.0;
  double mean_b = 0.0;
  double mean_difference = 0.0;  // a - b
  std::optional<TTestResult> test;
};

struct ComparisonReport {
  AggregateReport a, b;
  std::vector<MetricComparison> metrics;  // dist, cont, fluency
  TestKind kind = TestKind::paired;
};

/// Aggregates both sides and tests Dist/Cont/Fluency on instances where both
/// produced a contrast. Flip rate is reported but not tested. Both sides
/// must cover the same instance ids.
inline ComparisonReport compare(std::span<const MetricRecord> a, std::span<const MetricRecord> b,
                                TestKind kind = TestKind::paired) {
  if (a.size() != b.size()) throw Error(Errc::unpaired_inputs, "files cover different numbers of instances");
  std::map<std::string, const MetricRecord*> by_id;
  for (const auto& r : b)
    if (!by_id.emplace(r.id, &r).second) throw Error(Errc::duplicate_id, "duplicate id '" + r.id + "'");
  for (const auto& r : a)
    if (!by_id.count(r.id)) throw Error(Errc::unpaired_inputs, "id '" + r.id + "' missing from the second file");

  ComparisonReport rep;
  rep.kind = kind;
  rep.a = aggregate(a);
  rep.b = aggregate(b);

  using Getter = std::optional<double> MetricRecord::*;
  const std::pair<const char*, Getter> fields[] = {
      {"dist", &MetricRecord::dist}, {"cont", &MetricRecord::cont}, {"fluency", &MetricRecord::fluency}};
  for (const auto& [name, field] : fields) {
    std::vector<double> xa, xb;
    for (const auto& ra : a) {
      const MetricRecord& rb = *by_id.at(ra.id);
      if ((ra.*field) && (rb.*field)) {
        xa.push_back(*(ra.*field));
        xb.push_back(*(rb.*field));
      }
    }
    MetricComparison mc;
    mc.metric = name;
    mc.pairs = xa.size();
    mc.mean_a = summarize(xa).mean;
    mc.mean_b = summarize(xb).mean;
    mc.mean_difference = mc.mean_a - mc.mean_b;
    if (xa.size() >= 2) mc.test = kind == TestKind::paired ? paired_t_test(xa, xb) : welch_t_test(xa, xb);
    rep.metrics.push_back(mc);
  }
  return rep;
}

}  // namespace cat
