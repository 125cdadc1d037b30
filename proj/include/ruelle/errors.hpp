#pragma once

#include <stdexcept>
#include <string>

namespace ruelle {

/// A documented precondition or input contract was violated. The CLI maps
/// this to exit code 2; anything else escaping a subcommand is exit code 1.
class ContractError : public std::invalid_argument {
public:
    explicit ContractError(const std::string& what) : std::invalid_argument(what) {}
};

}  // namespace ruelle
