#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace conlang::utf8 {

/// Decodes UTF-8 into code points. Invalid bytes decode to U+FFFD.
std::vector<char32_t> decode(std::string_view text);

std::string encode(char32_t cp);
std::string encode(const std::vector<char32_t>& cps);

/// Splits a string into one std::string per code point.
std::vector<std::string> code_points(std::string_view text);

/// Unicode NFC normalization (ICU backed).
std::string nfc(std::string_view text);

/// True for combining marks and spacing modifier letters that attach to a
/// preceding base character in IPA (diacritics, length marks, tie bars...).
bool is_modifier(char32_t cp);

bool is_tie_bar(char32_t cp);

/// Splits on runs of ASCII whitespace; no empty tokens.
std::vector<std::string> split_whitespace(std::string_view text);

std::string join(const std::vector<std::string>& parts, std::string_view sep);

std::string_view trim(std::string_view text);

}  // namespace conlang::utf8
