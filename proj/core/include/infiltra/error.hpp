#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace infiltra {

// Pipeline error with a stable machine-readable name next to the human
// message. The CLI prints what() on exit code 2, so the name is the first
// token scripts see.
class Error : public std::runtime_error {
  public:
    Error(std::string name, const std::string& message)
        : std::runtime_error(name + ": " + message), name_(std::move(name)) {}

    const std::string& name() const noexcept { return name_; }

  private:
    std::string name_;
};

}  // namespace infiltra
