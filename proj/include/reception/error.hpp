#pragma once

#include <stdexcept>
#include <string>

namespace reception {

// Malformed or inconsistent input data (bad JSONL, unknown ids, corrupt
// vector files). Precondition violations on arguments use
// std::invalid_argument instead.
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace reception
