#pragma once

#include <stdexcept>
#include <string>

namespace meda {

enum class errc {
    invalid_argument,
    dimension_mismatch,
    length_mismatch,
    not_finite,
    singular_matrix,
    convergence_failure,
    spectrum_overlap,
    dimension_too_large,
    empty_domain,
    no_shared_classes,
    non_decreasing_loss,
    parse_error,
    inconsistent_width,
    negative_index,
    label_out_of_range,
    insufficient_target_labels,
    empty_training_set,
    empty_class,
    io_error,
};

constexpr const char* errc_name(errc c) {
    switch (c) {
        case errc::invalid_argument:           return "InvalidArgument";
        case errc::dimension_mismatch:         return "DimensionMismatch";
        case errc::length_mismatch:            return "LengthMismatch";
        case errc::not_finite:                 return "NotFinite";
        case errc::singular_matrix:            return "SingularMatrix";
        case errc::convergence_failure:        return "ConvergenceFailure";
        case errc::spectrum_overlap:           return "SpectrumOverlap";
        case errc::dimension_too_large:        return "DimensionTooLarge";
        case errc::empty_domain:               return "EmptyDomain";
        case errc::no_shared_classes:          return "NoSharedClasses";
        case errc::non_decreasing_loss:        return "NonDecreasingLoss";
        case errc::parse_error:                return "ParseError";
        case errc::inconsistent_width:         return "InconsistentWidth";
        case errc::negative_index:             return "NegativeIndex";
        case errc::label_out_of_range:         return "LabelOutOfRange";
        case errc::insufficient_target_labels: return "InsufficientTargetLabels";
        case errc::empty_training_set:         return "EmptyTrainingSet";
        case errc::empty_class:                return "EmptyClass";
        case errc::io_error:                   return "IoError";
    }
    return "UnknownError";
}

/// Library error type; code() identifies the failure class for the C API.
class Error : public std::runtime_error {
public:
    Error(errc code, const std::string& msg)
        : std::runtime_error(std::string(errc_name(code)) + ": " + msg), code_(code) {}

    errc code() const noexcept { return code_; }

private:
    errc code_;
};

[[noreturn]] inline void raise(errc code, const std::string& msg) { throw Error(code, msg); }

inline void require(bool ok, errc code, const std::string& msg) {
    if (!ok) raise(code, msg);
}

} // namespace meda
