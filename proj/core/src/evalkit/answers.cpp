#include "lift/evalkit/answers.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>

namespace lift::evalkit {

namespace {

std::string strip(const std::string& s) {
  size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

std::string drop_thousands_separators(const std::string& s) {
  std::string out;
  for (char c : s)
    if (c != ',') out += c;
  return out;
}

}  // namespace

std::optional<double> parse_numeric(const std::string& s) {
  std::string t = strip(s);
  if (t.empty()) return std::nullopt;
  auto slash = t.find('/');
  if (slash != std::string::npos) {
    auto num = parse_numeric(t.substr(0, slash));
    auto den = parse_numeric(t.substr(slash + 1));
    if (!num || !den || *den == 0.0) return std::nullopt;
    return *num / *den;
  }
  char* end = nullptr;
  double v = std::strtod(t.c_str(), &end);
  if (end != t.c_str() + t.size()) return std::nullopt;
  return v;
}

std::optional<std::string> extract_boxed_answer(const std::string& text) {
  const std::string marker = "\\boxed{";
  size_t pos = text.rfind(marker);
  if (pos == std::string::npos) return std::nullopt;
  size_t start = pos + marker.size();
  size_t close = text.find('}', start);
  if (close == std::string::npos) return std::nullopt;
  std::string inner = strip(drop_thousands_separators(text.substr(start, close - start)));
  if (!parse_numeric(inner)) return std::nullopt;
  return inner;
}

bool answers_equal(const std::string& a, const std::string& b) {
  auto va = parse_numeric(drop_thousands_separators(a));
  auto vb = parse_numeric(drop_thousands_separators(b));
  if (!va || !vb) return false;
  double denom = std::max({1.0, std::abs(*va), std::abs(*vb)});
  return std::abs(*va - *vb) / denom <= 1e-6;
}

}  // namespace lift::evalkit
