#pragma once

// Minimal deterministic JSON writer: object keys are emitted sorted, and
// reals are written in fixed 4-decimal notation (rounded half-up on the
// decimal expansion). Reading JSON is left to nlohmann/json.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

namespace hiagg {

/// Formats `x` with exactly four decimals, rounding half-up (away from zero)
/// on the decimal expansion, so 6.15075 becomes "6.1508".
inline std::string format_fixed4(double x) {
  if (!std::isfinite(x))
    return "null";
  const bool negative = x < 0;
  char buf[512];
  // Twelve decimals first: this settles binary representation noise (6.15075
  // is stored as 6.1507499999...) before the decimal half-up step.
  std::snprintf(buf, sizeof buf, "%.12f", std::fabs(x));
  std::string digits(buf);
  const auto dot = digits.find('.');
  std::string int_part = digits.substr(0, dot);
  std::string frac = digits.substr(dot + 1, 4);
  const bool round_up = digits[dot + 5] >= '5';

  std::string all = int_part + frac;
  if (round_up) {
    int i = static_cast<int>(all.size()) - 1;
    while (i >= 0) {
      if (all[i] == '9') {
        all[i] = '0';
        --i;
      } else {
        ++all[i];
        break;
      }
    }
    if (i < 0)
      all.insert(all.begin(), '1');
  }
  std::string out = all.substr(0, all.size() - 4) + "." + all.substr(all.size() - 4);
  const bool zero = std::all_of(out.begin(), out.end(), [](char c) { return c == '0' || c == '.'; });
  if (negative && !zero)
    out.insert(out.begin(), '-');
  return out;
}

/// The value `format_fixed4` would print, as a double.
inline double round4(double x) {
  const std::string s = format_fixed4(x);
  double v = 0.0;
  std::from_chars(s.data(), s.data() + s.size(), v);
  return v;
}

class JsonValue {
public:
  struct Fixed4 {
    double value;
  };
  using Array = std::vector<JsonValue>;
  using Object = std::vector<std::pair<std::string, JsonValue>>;

  JsonValue() : v_(nullptr) {}
  JsonValue(std::nullptr_t) : v_(nullptr) {}
  JsonValue(bool b) : v_(b) {}
  JsonValue(int i) : v_(static_cast<long long>(i)) {}
  JsonValue(long long i) : v_(i) {}
  JsonValue(unsigned long i) : v_(static_cast<long long>(i)) {}
  JsonValue(unsigned long long i) : v_(static_cast<long long>(i)) {}
  JsonValue(Fixed4 f) : v_(f) {}
  JsonValue(std::string s) : v_(std::move(s)) {}
  JsonValue(const char *s) : v_(std::string(s)) {}
  JsonValue(std::string_view s) : v_(std::string(s)) {}
  JsonValue(Array a) : v_(std::move(a)) {}
  JsonValue(Object o) : v_(std::move(o)) {}

  static JsonValue real(double x) { return JsonValue(Fixed4{x}); }
  template <typename T> static JsonValue optional_real(const T &opt) {
    return opt ? real(*opt) : JsonValue();
  }

  std::string dump() const {
    std::string out;
    write(out, 0);
    out += '\n';
    return out;
  }

private:
  static void indent(std::string &out, int depth) { out.append(static_cast<std::size_t>(depth) * 2, ' '); }

  static void write_string(std::string &out, std::string_view s) {
    out += '"';
    for (char c : s) {
      switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      case '\t': out += "\\t"; break;
      default:
        if (static_cast<unsigned char>(c) < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof buf, "\\u%04x", static_cast<unsigned>(c));
          out += buf;
        } else {
          out += c;
        }
      }
    }
    out += '"';
  }

  void write(std::string &out, int depth) const {
    std::visit(
        [&](const auto &v) {
          using T = std::decay_t<decltype(v)>;
          if constexpr (std::is_same_v<T, std::nullptr_t>) {
            out += "null";
          } else if constexpr (std::is_same_v<T, bool>) {
            out += v ? "true" : "false";
          } else if constexpr (std::is_same_v<T, long long>) {
            out += std::to_string(v);
          } else if constexpr (std::is_same_v<T, Fixed4>) {
            out += format_fixed4(v.value);
          } else if constexpr (std::is_same_v<T, std::string>) {
            write_string(out, v);
          } else if constexpr (std::is_same_v<T, Array>) {
            if (v.empty()) {
              out += "[]";
              return;
            }
            out += "[\n";
            for (std::size_t i = 0; i < v.size(); ++i) {
              indent(out, depth + 1);
              v[i].write(out, depth + 1);
              out += i + 1 < v.size() ? ",\n" : "\n";
            }
            indent(out, depth);
            out += ']';
          } else {
            if (v.empty()) {
              out += "{}";
              return;
            }
            std::vector<const std::pair<std::string, JsonValue> *> sorted;
            for (const auto &kv : v)
              sorted.push_back(&kv);
            std::sort(sorted.begin(), sorted.end(),
                      [](const auto *a, const auto *b) { return a->first < b->first; });
            out += "{\n";
            for (std::size_t i = 0; i < sorted.size(); ++i) {
              indent(out, depth + 1);
              write_string(out, sorted[i]->first);
              out += ": ";
              sorted[i]->second.write(out, depth + 1);
              out += i + 1 < sorted.size() ? ",\n" : "\n";
            }
            indent(out, depth);
            out += '}';
          }
        },
        v_);
  }

  std::variant<std::nullptr_t, bool, long long, Fixed4, std::string, Array, Object> v_;
};

} // namespace hiagg
