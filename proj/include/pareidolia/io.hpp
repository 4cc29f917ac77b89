#pragma once

#include <string>

namespace pareidolia::io {

std::string read_text_file(const std::string& path);

/// Temp-then-rename write; the target never exists half-written.
void write_file_atomic(const std::string& path, const std::string& content);

}  // namespace pareidolia::io
