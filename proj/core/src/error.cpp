#include "lru/error.hpp"

namespace lru {

std::string_view to_string(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::Config: return "config";
        case ErrorKind::Contract: return "contract";
        case ErrorKind::Schema: return "schema";
        case ErrorKind::Parse: return "parse";
        case ErrorKind::Imputation: return "imputation";
        case ErrorKind::Coverage: return "coverage";
        case ErrorKind::Usage: return "usage";
        case ErrorKind::Compatibility: return "compatibility";
        case ErrorKind::Version: return "version";
        case ErrorKind::Training: return "training";
        case ErrorKind::Io: return "io";
    }
    return "unknown";
}

int exit_code(ErrorKind kind) noexcept { return 10 + static_cast<int>(kind); }

}  // namespace lru
