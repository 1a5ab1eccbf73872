#pragma once

#include <string>

#include <doctest.h>

#include "cellscape/error.hpp"

namespace support {

struct Caught {
  cellscape::ErrorCode code = cellscape::ErrorCode::io;
  std::string message;
  bool thrown = false;
};

inline Caught catch_error(auto&& fn) {
  try {
    fn();
  } catch (const cellscape::Error& e) {
    return {e.code(), e.what(), true};
  }
  FAIL("expected cellscape::Error");
  return {};
}

inline std::string data_path(const std::string& name) { return std::string(CELLSCAPE_DATA_DIR) + "/" + name; }

}  // namespace support
