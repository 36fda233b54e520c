#pragma once

#include <stdexcept>
#include <string>

namespace dci {

// Engine error with a stable machine-readable code alongside the message.
class DciError : public std::runtime_error {
public:
    DciError(std::string code, const std::string& message)
        : std::runtime_error(message), code_(std::move(code)) {}

    const std::string& code() const noexcept { return code_; }

private:
    std::string code_;
};

} // namespace dci
