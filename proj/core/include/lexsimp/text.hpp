#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace lexsimp::text {

/// Splits on runs of ASCII whitespace; empty fields are dropped.
std::vector<std::string> split_whitespace(std::string_view s);

/// Splits on a single delimiter character; empty fields are kept.
std::vector<std::string_view> split(std::string_view s, char delim);

/// Splits on a multi-character delimiter such as " ||| ".
std::vector<std::string_view> split(std::string_view s, std::string_view delim);

std::string_view trim(std::string_view s);

std::string to_lower(std::string_view s);

/// Whitespace tokenization with leading/trailing punctuation stripped from
/// each token. Tokens that are pure punctuation vanish. Case is preserved.
std::vector<std::string> tokenize(std::string_view phrase);

std::string join(const std::vector<std::string>& tokens, std::string_view sep);

/// Strict numeric parsing: the whole field must be consumed.
bool parse_double(std::string_view s, double& out);
bool parse_int(std::string_view s, long long& out);

/// Shortest round-trip decimal representation.
std::string format_double(double v);

}  // namespace lexsimp::text
