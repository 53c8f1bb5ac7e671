#include "sa_lab/schedule.hpp"

#include "sa_lab/error.hpp"

#include <algorithm>
#include <cmath>
#include <charconv>
#include <cstdlib>
#include <map>
#include <sstream>

namespace salab {

namespace {

double parse_number(const std::string& text, const std::string& what) {
  const char* begin = text.c_str();
  char* end = nullptr;
  const double v = std::strtod(begin, &end);
  if (text.empty() || end != begin + text.size() || !std::isfinite(v)) {
    throw InvalidInput("schedule: cannot parse " + what + " from '" + text + "'");
  }
  return v;
}

std::string format_number(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

}  // namespace

StepSchedule StepSchedule::constant(double eps) {
  if (!(eps > 0.0 && eps < 1.0)) throw InvalidInput("constant schedule: eps must lie in (0,1)");
  return StepSchedule(Kind::Constant, eps, 0.0, 0.0);
}

StepSchedule StepSchedule::polynomial(double eps, double h, double xi) {
  if (!(eps > 0.0) || !std::isfinite(eps)) throw InvalidInput("polynomial schedule: eps must be positive");
  if (!(h >= 0.0) || !std::isfinite(h)) throw InvalidInput("polynomial schedule: h must be nonnegative");
  if (!(xi > 0.0 && xi <= 1.0)) throw InvalidInput("polynomial schedule: xi must lie in (0,1]");
  const double first = eps / std::pow(h, xi);
  if (!(first > 0.0 && first <= 1.0)) {
    throw InvalidInput("polynomial schedule: first step eps/h^xi = " + format_number(first) +
                       " is outside (0,1]");
  }
  return StepSchedule(Kind::Polynomial, eps, h, xi);
}

StepSchedule StepSchedule::parse(const std::string& text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos) throw InvalidInput("schedule: expected 'const:<eps>' or 'poly:eps=..,h=..,xi=..'");
  const std::string kind = text.substr(0, colon);
  const std::string rest = text.substr(colon + 1);
  if (kind == "const") return constant(parse_number(rest, "eps"));
  if (kind != "poly") throw InvalidInput("schedule: unknown kind '" + kind + "'");

  std::map<std::string, double> fields;
  std::stringstream ss(rest);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw InvalidInput("schedule: expected key=value, got '" + item + "'");
    const std::string key = item.substr(0, eq);
    if (key != "eps" && key != "h" && key != "xi") throw InvalidInput("schedule: unknown key '" + key + "'");
    fields[key] = parse_number(item.substr(eq + 1), key);
  }
  for (const char* key : {"eps", "h", "xi"}) {
    if (!fields.count(key)) throw InvalidInput(std::string("schedule: missing key '") + key + "'");
  }
  return polynomial(fields["eps"], fields["h"], fields["xi"]);
}

double StepSchedule::eps(std::int64_t k) const {
  if (k < 0) throw InvalidInput("eps: k must be nonnegative");
  if (kind_ == Kind::Constant) return eps_;
  return eps_ / std::pow(static_cast<double>(k) + h_, xi_);
}

double StepSchedule::partial_sum(std::int64_t i, std::int64_t j) const {
  if (i > j + 1) throw InvalidInput("partial_sum: empty range requires i = j + 1, got i > j + 1");
  i = std::max<std::int64_t>(i, 0);
  if (i > j) return 0.0;
  if (kind_ == Kind::Constant) return eps_ * static_cast<double>(j - i + 1);
  double sum = 0.0;
  for (std::int64_t k = i; k <= j; ++k) sum += eps(k);
  return sum;
}

std::string StepSchedule::to_string() const {
  if (kind_ == Kind::Constant) return "const:" + format_number(eps_);
  return "poly:eps=" + format_number(eps_) + ",h=" + format_number(h_) + ",xi=" + format_number(xi_);
}

}  // namespace salab
