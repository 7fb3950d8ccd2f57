#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace cat {

enum class Errc {
  empty_text,
  invalid_edit,
  oov_policy_violation,
  degenerate_dataset,
  non_differentiable_backend,
  mismatched_banks,
  no_contrast_found,
  empty_evaluation,
  degenerate_embedding,
  degenerate_loss,
  unpaired_inputs,
  malformed_record,
  duplicate_id,
  config_error,
  io_error,
};

constexpr std::string_view errc_name(Errc c) {
  switch (c) {
    case Errc::empty_text: return "EmptyText";
    case Errc::invalid_edit: return "InvalidEdit";
    case Errc::oov_policy_violation: return "OovPolicyViolation";
    case Errc::degenerate_dataset: return "DegenerateDataset";
    case Errc::non_differentiable_backend: return "NonDifferentiableBackend";
    case Errc::mismatched_banks: return "MismatchedBanks";
    case Errc::no_contrast_found: return "NoContrastFound";
    case Errc::empty_evaluation: return "EmptyEvaluation";
    case Errc::degenerate_embedding: return "DegenerateEmbedding";
    case Errc::degenerate_loss: return "DegenerateLoss";
    case Errc::unpaired_inputs: return "UnpairedInputs";
    case Errc::malformed_record: return "MalformedRecord";
    case Errc::duplicate_id: return "DuplicateId";
    case Errc::config_error: return "ConfigError";
    case Errc::io_error: return "IoError";
  }
  return "Unknown";
}

/// Every failure raised by the library carries one of the Errc kinds so
/// callers (and tests) can branch on the kind rather than the message.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace cat
