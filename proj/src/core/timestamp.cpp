#include "layerfix/core/timestamp.hpp"

#include <cctype>
#include <charconv>

#include <fmt/format.h>

#include "layerfix/core/error.hpp"

namespace layerfix {
namespace {

// Howard Hinnant's civil calendar conversions.
std::int64_t days_from_civil(std::int64_t y, unsigned m, unsigned d) {
    y -= m <= 2;
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const auto yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

void civil_from_days(std::int64_t z, std::int64_t& y, unsigned& m, unsigned& d) {
    z += 719468;
    const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const auto doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    y = static_cast<std::int64_t>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    d = doy - (153 * mp + 2) / 5 + 1;
    m = mp < 10 ? mp + 3 : mp - 9;
    y += m <= 2;
}

class Reader {
public:
    explicit Reader(std::string_view text) : text_(text) {}

    int digits(std::size_t count) {
        if (pos_ + count > text_.size()) fail();
        int value = 0;
        for (std::size_t i = 0; i < count; ++i) {
            const char c = text_[pos_++];
            if (!std::isdigit(static_cast<unsigned char>(c))) fail();
            value = value * 10 + (c - '0');
        }
        return value;
    }
    void expect(char c) {
        if (pos_ >= text_.size() || text_[pos_] != c) fail();
        ++pos_;
    }
    bool accept(char c) {
        if (pos_ < text_.size() && text_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }
    std::size_t skip_digits() {
        const std::size_t start = pos_;
        while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
        return pos_ - start;
    }
    [[nodiscard]] bool done() const { return pos_ == text_.size(); }
    [[noreturn]] void fail() const { throw Error(ErrorKind::parse, "invalid timestamp: \"" + std::string(text_) + "\""); }

private:
    std::string_view text_;
    std::size_t pos_ = 0;
};

}  // namespace

Timestamp parse_timestamp(std::string_view text) {
    Timestamp seconds = 0;
    const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), seconds);
    if (ec == std::errc{} && end == text.data() + text.size() && !text.empty()) return seconds;

    Reader r(text);
    const int year = r.digits(4);
    r.expect('-');
    const int month = r.digits(2);
    r.expect('-');
    const int day = r.digits(2);
    if (month < 1 || month > 12 || day < 1 || day > 31) r.fail();
    Timestamp t = days_from_civil(year, static_cast<unsigned>(month), static_cast<unsigned>(day)) * 86400;
    if (r.done()) return t;

    if (!r.accept('T') && !r.accept(' ')) r.fail();
    const int hh = r.digits(2);
    r.expect(':');
    const int mm = r.digits(2);
    r.expect(':');
    const int ss = r.digits(2);
    if (hh > 23 || mm > 59 || ss > 60) r.fail();
    t += hh * 3600 + mm * 60 + ss;
    if (r.accept('.') && r.skip_digits() == 0) r.fail();
    if (r.done()) return t;
    if (r.accept('Z')) {
        if (!r.done()) r.fail();
        return t;
    }
    const int sign = r.accept('+') ? 1 : (r.accept('-') ? -1 : 0);
    if (sign == 0) r.fail();
    const int oh = r.digits(2);
    r.accept(':');
    const int om = r.digits(2);
    if (!r.done()) r.fail();
    return t - sign * (oh * 3600 + om * 60);
}

std::string format_timestamp(Timestamp t) {
    std::int64_t days = t / 86400;
    std::int64_t rem = t % 86400;
    if (rem < 0) {
        rem += 86400;
        --days;
    }
    std::int64_t y = 0;
    unsigned m = 0, d = 0;
    civil_from_days(days, y, m, d);
    return fmt::format("{:04}-{:02}-{:02}T{:02}:{:02}:{:02}Z", y, m, d, rem / 3600, rem / 60 % 60, rem % 60);
}

}  // namespace layerfix
