#pragma once

#include <stdexcept>
#include <string>

namespace nibm {

// Exit-code taxonomy shared with the CLI:
//   2 = parameter domain error, 3 = numerical failure, 4 = infeasible sampling.
class Error : public std::runtime_error {
public:
    Error(std::string msg, int exit_code, std::string code_name)
        : std::runtime_error(std::move(msg)),
          exit_code_(exit_code),
          code_name_(std::move(code_name)) {}
    int exit_code() const noexcept { return exit_code_; }
    const std::string& code_name() const noexcept { return code_name_; }

private:
    int exit_code_;
    std::string code_name_;
};

class DomainError : public Error {
public:
    explicit DomainError(std::string msg, std::string code = "DomainError")
        : Error(std::move(msg), 2, std::move(code)) {}
};

class NumericalError : public Error {
public:
    explicit NumericalError(std::string msg, std::string code = "NumericalError")
        : Error(std::move(msg), 3, std::move(code)) {}
};

class CriticalTimeError : public DomainError {
public:
    explicit CriticalTimeError(std::string msg)
        : DomainError(std::move(msg), "CriticalTime") {}
};

class CriticalSeparationError : public DomainError {
public:
    explicit CriticalSeparationError(std::string msg)
        : DomainError(std::move(msg), "CriticalSeparation") {}
};

class PoleError : public DomainError {
public:
    explicit PoleError(std::string msg) : DomainError(std::move(msg), "Pole") {}
};

class ClassificationError : public NumericalError {
public:
    explicit ClassificationError(std::string msg)
        : NumericalError(std::move(msg), "Classification") {}
};

class PathError : public NumericalError {
public:
    explicit PathError(std::string msg) : NumericalError(std::move(msg), "Path") {}
};

class EdgeFitError : public NumericalError {
public:
    explicit EdgeFitError(std::string msg) : NumericalError(std::move(msg), "EdgeFit") {}
};

class PrecisionError : public NumericalError {
public:
    explicit PrecisionError(std::string msg)
        : NumericalError(std::move(msg), "Precision") {}
};

class InfeasibleError : public Error {
public:
    explicit InfeasibleError(std::string msg)
        : Error(std::move(msg), 4, "Infeasible") {}
};

} // namespace nibm
