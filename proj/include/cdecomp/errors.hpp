#pragma once

#include <stdexcept>
#include <string>

namespace cdecomp {

// Error classes map onto process exit codes:
//   usage/domain 2, validation 3, fit errors 4, degenerate contrast 5.
enum class errc {
    usage,
    domain,
    validation,
    design,
    separation,
    nonconvergence,
    numerical,
    degenerate_contrast,
};

inline const char* errc_label(errc c) {
    switch (c) {
        case errc::usage: return "usage";
        case errc::domain: return "domain";
        case errc::validation: return "validation";
        case errc::design: return "design";
        case errc::separation: return "separation";
        case errc::nonconvergence: return "nonconvergence";
        case errc::numerical: return "numerical";
        case errc::degenerate_contrast: return "degenerate-contrast";
    }
    return "unknown";
}

inline int errc_exit_code(errc c) {
    switch (c) {
        case errc::usage:
        case errc::domain: return 2;
        case errc::validation: return 3;
        case errc::design:
        case errc::separation:
        case errc::nonconvergence:
        case errc::numerical: return 4;
        case errc::degenerate_contrast: return 5;
    }
    return 1;
}

class error : public std::runtime_error {
  public:
    error(errc code, const std::string& msg) : std::runtime_error(msg), code_(code) {}
    errc code() const noexcept { return code_; }
    const char* label() const noexcept { return errc_label(code_); }
    int exit_code() const noexcept { return errc_exit_code(code_); }

  private:
    errc code_;
};

struct usage_error : error {
    explicit usage_error(const std::string& msg) : error(errc::usage, msg) {}
};
struct domain_error : error {
    explicit domain_error(const std::string& msg) : error(errc::domain, msg) {}
};
struct validation_error : error {
    explicit validation_error(const std::string& msg) : error(errc::validation, msg) {}
};
struct design_error : error {
    explicit design_error(const std::string& msg) : error(errc::design, msg) {}
};
struct separation_error : error {
    explicit separation_error(const std::string& msg) : error(errc::separation, msg) {}
};
struct nonconvergence_error : error {
    explicit nonconvergence_error(const std::string& msg) : error(errc::nonconvergence, msg) {}
};
struct numerical_error : error {
    explicit numerical_error(const std::string& msg) : error(errc::numerical, msg) {}
};
struct degenerate_contrast_error : error {
    explicit degenerate_contrast_error(const std::string& msg)
        : error(errc::degenerate_contrast, msg) {}
};

}  // namespace cdecomp
