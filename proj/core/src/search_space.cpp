#include "tids/search_space.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>

#include "tids/errors.hpp"

namespace tids {

std::int64_t Assignment::get_int(const std::string& name) const {
  auto it = values.find(name);
  if (it == values.end()) throw ConfigError("assignment misses parameter: " + name);
  if (const auto* v = std::get_if<std::int64_t>(&it->second)) return *v;
  throw ConfigError("parameter is not an integer: " + name);
}

double Assignment::get_real(const std::string& name) const {
  auto it = values.find(name);
  if (it == values.end()) throw ConfigError("assignment misses parameter: " + name);
  if (const auto* v = std::get_if<double>(&it->second)) return *v;
  if (const auto* v = std::get_if<std::int64_t>(&it->second)) return static_cast<double>(*v);
  throw ConfigError("parameter is not a number: " + name);
}

const std::string& Assignment::get_string(const std::string& name) const {
  auto it = values.find(name);
  if (it == values.end()) throw ConfigError("assignment misses parameter: " + name);
  if (const auto* v = std::get_if<std::string>(&it->second)) return *v;
  throw ConfigError("parameter is not categorical: " + name);
}

std::string Assignment::describe() const {
  std::string out;
  for (const auto& [k, v] : values) {
    if (!out.empty()) out += ";";
    out += k;
    out += "=";
    if (const auto* i = std::get_if<std::int64_t>(&v)) {
      out += std::to_string(*i);
    } else if (const auto* d = std::get_if<double>(&v)) {
      char tmp[40];
      auto [p, ec] = std::to_chars(tmp, tmp + sizeof(tmp), *d);
      out.append(tmp, p);
    } else {
      out += std::get<std::string>(v);
    }
  }
  return out;
}

void SearchSpace::check_new(const std::string& name, const std::string& parent,
                            const std::string& parent_value) const {
  for (const auto& p : params_)
    if (p.name == name) throw ConfigError("duplicate parameter: " + name);
  if (parent.empty()) return;
  const ParamSpec* found = nullptr;
  for (const auto& p : params_)
    if (p.name == parent) found = &p;
  if (!found) throw ConfigError("conditional parameter '" + name + "' declared before its parent");
  if (found->kind != ParamSpec::Kind::Categorical)
    throw ConfigError("parent of '" + name + "' must be categorical");
  if (std::find(found->categories.begin(), found->categories.end(), parent_value) ==
      found->categories.end())
    throw ConfigError("parent value '" + parent_value + "' is not a category of " + parent);
}

SearchSpace& SearchSpace::add_int(const std::string& name, std::int64_t lo, std::int64_t hi,
                                  bool log_scale) {
  return add_int_if(name, lo, hi, "", "", log_scale);
}

SearchSpace& SearchSpace::add_real(const std::string& name, double lo, double hi, bool log_scale) {
  return add_real_if(name, lo, hi, "", "", log_scale);
}

SearchSpace& SearchSpace::add_categorical(const std::string& name,
                                          std::vector<std::string> categories) {
  return add_categorical_if(name, std::move(categories), "", "");
}

SearchSpace& SearchSpace::add_int_if(const std::string& name, std::int64_t lo, std::int64_t hi,
                                     const std::string& parent, const std::string& parent_value,
                                     bool log_scale) {
  check_new(name, parent, parent_value);
  if (hi < lo) throw ConfigError("empty integer range for " + name);
  if (log_scale && lo <= 0) throw ConfigError("log-scaled range needs positive bounds: " + name);
  ParamSpec p;
  p.name = name;
  p.kind = ParamSpec::Kind::Integer;
  p.lo = static_cast<double>(lo);
  p.hi = static_cast<double>(hi);
  p.log_scale = log_scale;
  p.parent = parent;
  p.parent_value = parent_value;
  params_.push_back(std::move(p));
  return *this;
}

SearchSpace& SearchSpace::add_real_if(const std::string& name, double lo, double hi,
                                      const std::string& parent, const std::string& parent_value,
                                      bool log_scale) {
  check_new(name, parent, parent_value);
  if (!(hi >= lo)) throw ConfigError("empty real range for " + name);
  if (log_scale && lo <= 0) throw ConfigError("log-scaled range needs positive bounds: " + name);
  ParamSpec p;
  p.name = name;
  p.kind = ParamSpec::Kind::Real;
  p.lo = lo;
  p.hi = hi;
  p.log_scale = log_scale;
  p.parent = parent;
  p.parent_value = parent_value;
  params_.push_back(std::move(p));
  return *this;
}

SearchSpace& SearchSpace::add_categorical_if(const std::string& name,
                                             std::vector<std::string> categories,
                                             const std::string& parent,
                                             const std::string& parent_value) {
  check_new(name, parent, parent_value);
  if (categories.empty()) throw ConfigError("categorical parameter needs categories: " + name);
  ParamSpec p;
  p.name = name;
  p.kind = ParamSpec::Kind::Categorical;
  p.categories = std::move(categories);
  p.parent = parent;
  p.parent_value = parent_value;
  params_.push_back(std::move(p));
  return *this;
}

bool SearchSpace::has_conditionals() const {
  for (const auto& p : params_)
    if (!p.parent.empty()) return true;
  return false;
}

bool SearchSpace::is_active(const ParamSpec& p, const Assignment& a) const {
  if (p.parent.empty()) return true;
  auto it = a.values.find(p.parent);
  if (it == a.values.end()) return false;
  const auto* v = std::get_if<std::string>(&it->second);
  if (!v || *v != p.parent_value) return false;
  for (const auto& q : params_)
    if (q.name == p.parent) return is_active(q, a);
  return false;
}

void SearchSpace::validate(const Assignment& a) const {
  std::size_t matched = 0;
  for (const auto& p : params_) {
    bool active = is_active(p, a);
    bool present = a.has(p.name);
    if (active && !present)
      throw ConfigError("assignment misses active parameter: " + p.name);
    if (!active && present)
      throw ConfigError("assignment carries inactive parameter: " + p.name);
    if (!active) continue;
    ++matched;
    switch (p.kind) {
      case ParamSpec::Kind::Integer: {
        auto v = a.get_int(p.name);
        if (v < static_cast<std::int64_t>(p.lo) || v > static_cast<std::int64_t>(p.hi))
          throw ConfigError("parameter out of range: " + p.name + "=" + std::to_string(v));
        break;
      }
      case ParamSpec::Kind::Real: {
        double v = a.get_real(p.name);
        if (!(v >= p.lo && v <= p.hi))
          throw ConfigError("parameter out of range: " + p.name + "=" + std::to_string(v));
        break;
      }
      case ParamSpec::Kind::Categorical: {
        const auto& v = a.get_string(p.name);
        if (std::find(p.categories.begin(), p.categories.end(), v) == p.categories.end())
          throw ConfigError("unknown category for " + p.name + ": " + v);
        break;
      }
    }
  }
  if (matched != a.values.size())
    throw ConfigError("assignment carries parameters outside the space");
}

Assignment SearchSpace::sample(Rng& rng) const {
  Assignment a;
  for (const auto& p : params_) {
    if (!is_active(p, a)) continue;
    switch (p.kind) {
      case ParamSpec::Kind::Integer: {
        std::int64_t v;
        if (p.log_scale) {
          double t = rng.uniform(std::log(p.lo), std::log(p.hi));
          v = static_cast<std::int64_t>(std::llround(std::exp(t)));
        } else {
          v = rng.range(static_cast<std::int64_t>(p.lo), static_cast<std::int64_t>(p.hi));
        }
        v = std::clamp(v, static_cast<std::int64_t>(p.lo), static_cast<std::int64_t>(p.hi));
        a.values[p.name] = v;
        break;
      }
      case ParamSpec::Kind::Real: {
        double v = p.log_scale ? std::exp(rng.uniform(std::log(p.lo), std::log(p.hi)))
                               : rng.uniform(p.lo, p.hi);
        a.values[p.name] = std::clamp(v, p.lo, p.hi);
        break;
      }
      case ParamSpec::Kind::Categorical: {
        a.values[p.name] = p.categories[rng.below(p.categories.size())];
        break;
      }
    }
  }
  return a;
}

std::size_t SearchSpace::finite_size() const {
  // conservative: only spaces without conditionals count as enumerable
  if (has_conditionals()) return 0;
  std::size_t total = 1;
  for (const auto& p : params_) {
    std::size_t options;
    if (p.kind == ParamSpec::Kind::Integer)
      options = static_cast<std::size_t>(p.hi - p.lo) + 1;
    else if (p.kind == ParamSpec::Kind::Categorical)
      options = p.categories.size();
    else
      return 0;
    if (total > 1000000 / options) return 0;  // too large to enumerate
    total *= options;
  }
  return total;
}

std::string trials_to_csv(const std::vector<Trial>& trials) {
  std::string out = "index,parameters,objective,failed,wall_seconds\n";
  for (const auto& t : trials) {
    out += std::to_string(t.index);
    out += ",\"";
    out += t.assignment.describe();
    out += "\",";
    char tmp[40];
    auto [p1, e1] = std::to_chars(tmp, tmp + sizeof(tmp), t.objective);
    out.append(tmp, p1);
    out += t.failed ? ",1," : ",0,";
    auto [p2, e2] = std::to_chars(tmp, tmp + sizeof(tmp), t.wall_seconds);
    out.append(tmp, p2);
    out += '\n';
  }
  return out;
}

}  // namespace tids
