#include "tda/error.hpp"

namespace tda {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::input: return "E_INPUT";
    case ErrorCode::schema: return "E_SCHEMA";
    case ErrorCode::format: return "E_FORMAT";
    case ErrorCode::config: return "E_CONFIG";
    case ErrorCode::not_found: return "E_NOT_FOUND";
    case ErrorCode::conflict: return "E_CONFLICT";
    case ErrorCode::internal: return "E_INTERNAL";
  }
  return "E_INTERNAL";
}

}  // namespace tda
