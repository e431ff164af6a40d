#pragma once

#include <string>
#include <vector>

namespace copydst {

// Reserved vocabulary index 0; also the stand-in token for degenerate turns.
inline const std::string kPadToken = "<pad>";

// The one tokenizer shared by utterances, system actions and ontology
// values. Copy matching compares tokens across all three, so they must
// agree: lowercase, punctuation (except apostrophes) treated as spaces,
// split on whitespace. Bytes outside ASCII pass through untouched.
inline std::vector<std::string> tokenize(const std::string& text) {
    std::string cleaned;
    cleaned.reserve(text.size());
    for (unsigned char c : text) {
        if (c >= 'A' && c <= 'Z') {
            cleaned.push_back(static_cast<char>(c - 'A' + 'a'));
        } else if (c <= 0x7f && !(c >= 'a' && c <= 'z') && !(c >= '0' && c <= '9') &&
                   c != '\'' && !(c == ' ' || c == '\t' || c == '\n' || c == '\r')) {
            cleaned.push_back(' ');
        } else {
            cleaned.push_back(static_cast<char>(c));
        }
    }
    std::vector<std::string> tokens;
    std::string cur;
    for (char c : cleaned) {
        if (c == ' ' || c == '\t' || c == '\n' || c == '\r') {
            if (!cur.empty()) {
                tokens.push_back(cur);
                cur.clear();
            }
        } else {
            cur.push_back(c);
        }
    }
    if (!cur.empty()) tokens.push_back(cur);
    return tokens;
}

// Canonical form used wherever two surface strings must be compared as
// values (ontology uniqueness, gold-label lookup, goal matching).
inline std::string normalize_value(const std::string& s) {
    std::string out;
    for (const auto& tok : tokenize(s)) {
        if (!out.empty()) out.push_back(' ');
        out += tok;
    }
    return out;
}

}  // namespace copydst
