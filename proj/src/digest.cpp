#include "conlang/digest.hpp"

#include <openssl/sha.h>

#include <array>

namespace conlang {

namespace {

std::array<unsigned char, SHA256_DIGEST_LENGTH> raw_sha256(std::string_view data) {
    std::array<unsigned char, SHA256_DIGEST_LENGTH> md{};
    SHA256(reinterpret_cast<const unsigned char*>(data.data()), data.size(), md.data());
    return md;
}

}  // namespace

std::string sha256_hex(std::string_view data) {
    static constexpr char kHex[] = "0123456789abcdef";
    auto md = raw_sha256(data);
    std::string out;
    out.reserve(md.size() * 2);
    for (unsigned char b : md) {
        out += kHex[b >> 4];
        out += kHex[b & 0xF];
    }
    return out;
}

std::uint64_t sha256_u64(std::string_view data) {
    auto md = raw_sha256(data);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v = (v << 8) | md[i];
    return v;
}

}  // namespace conlang
