#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "conlang/error.hpp"

namespace conlang {

class IoError : public Error {
public:
    using Error::Error;
};

std::string read_file(const std::filesystem::path& path);

/// Writes to a sibling temp file, then renames over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

}  // namespace conlang
