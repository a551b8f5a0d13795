#include "fusionkit/tokenize.hpp"

#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>
#include <unicode/utf8.h>

#include <stdexcept>

namespace fusionkit::text {
namespace {

bool is_word_char(UChar32 c)
{
    if (u_isalnum(c)) {
        return true;
    }
    const auto type = u_charType(c);
    return type == U_NON_SPACING_MARK || type == U_COMBINING_SPACING_MARK ||
           type == U_ENCLOSING_MARK;
}

bool is_ascii(std::string_view s)
{
    for (const unsigned char ch : s) {
        if (ch >= 0x80) {
            return false;
        }
    }
    return true;
}

// Fast path: ASCII input needs neither normalization nor full case folding.
std::vector<std::string> tokenize_ascii(std::string_view s)
{
    std::vector<std::string> out;
    std::string cur;
    for (const char ch : s) {
        const auto c = static_cast<unsigned char>(ch);
        if ((c >= 'a' && c <= 'z') || (c >= '0' && c <= '9')) {
            cur.push_back(ch);
        } else if (c >= 'A' && c <= 'Z') {
            cur.push_back(static_cast<char>(c - 'A' + 'a'));
        } else if (!cur.empty()) {
            out.push_back(std::move(cur));
            cur.clear();
        }
    }
    if (!cur.empty()) {
        out.push_back(std::move(cur));
    }
    return out;
}

} // namespace

std::vector<std::string> tokenize(std::string_view text)
{
    if (is_ascii(text)) {
        return tokenize_ascii(text);
    }

    // Replace malformed sequences with U+FFFD (not a word char) before normalizing.
    const auto source = icu::UnicodeString::fromUTF8(
        icu::StringPiece(text.data(), static_cast<int32_t>(text.size())));

    UErrorCode status = U_ZERO_ERROR;
    const icu::Normalizer2* folder = icu::Normalizer2::getNFKCCasefoldInstance(status);
    if (U_FAILURE(status)) {
        throw std::runtime_error("ICU NFKC_Casefold normalizer unavailable");
    }
    const icu::UnicodeString folded = folder->normalize(source, status);
    if (U_FAILURE(status)) {
        throw std::runtime_error("ICU normalization failed");
    }

    std::vector<std::string> out;
    icu::UnicodeString cur;
    auto flush = [&] {
        if (!cur.isEmpty()) {
            std::string word;
            cur.toUTF8String(word);
            out.push_back(std::move(word));
            cur.remove();
        }
    };
    for (int32_t i = 0; i < folded.length();) {
        const UChar32 c = folded.char32At(i);
        i += U16_LENGTH(c);
        if (is_word_char(c)) {
            cur.append(c);
        } else {
            flush();
        }
    }
    flush();
    return out;
}

std::string case_fold(std::string_view text)
{
    auto u = icu::UnicodeString::fromUTF8(icu::StringPiece(text.data(), static_cast<int32_t>(text.size())));
    u.foldCase();
    std::string out;
    u.toUTF8String(out);
    return out;
}

} // namespace fusionkit::text
