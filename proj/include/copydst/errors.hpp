#pragma once

#include <stdexcept>
#include <string>

namespace copydst {

// Shape or dimension disagreement between tensors / matrices.
struct DimensionError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Caller violated a documented precondition.
struct ContractError : std::logic_error {
    using std::logic_error::logic_error;
};

// Malformed input file (word vectors, corpus JSON, checkpoint).
struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Training loss became non-finite; message carries the last finite step.
struct TrainingDiverged : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace copydst
