#include "newscast/errors.hpp"

namespace newscast {

int exit_code_for(ErrorCategory category) noexcept {
    switch (category) {
        case ErrorCategory::config: return 2;
        case ErrorCategory::data: return 3;
        case ErrorCategory::numeric: return 4;
        case ErrorCategory::internal: return 1;
    }
    return 1;
}

}  // namespace newscast
