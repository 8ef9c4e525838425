#ifndef TIDS_SEARCH_SPACE_HPP
#define TIDS_SEARCH_SPACE_HPP

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <variant>
#include <vector>

#include "tids/rng.hpp"

namespace tids {

using ParamValue = std::variant<std::int64_t, double, std::string>;

struct Assignment {
  std::map<std::string, ParamValue> values;

  bool has(const std::string& name) const { return values.count(name) > 0; }
  std::int64_t get_int(const std::string& name) const;
  double get_real(const std::string& name) const;
  const std::string& get_string(const std::string& name) const;
  std::string describe() const;  // stable key, also used for deduplication
};

struct ParamSpec {
  enum class Kind { Integer, Real, Categorical };
  std::string name;
  Kind kind = Kind::Real;
  double lo = 0.0;
  double hi = 1.0;
  bool log_scale = false;
  std::vector<std::string> categories;
  std::string parent;        // empty = always active
  std::string parent_value;  // activates when the parent takes this category
};

class SearchSpace {
public:
  SearchSpace& add_int(const std::string& name, std::int64_t lo, std::int64_t hi,
                       bool log_scale = false);
  SearchSpace& add_real(const std::string& name, double lo, double hi, bool log_scale = false);
  SearchSpace& add_categorical(const std::string& name, std::vector<std::string> categories);
  // conditional variants: active only while parent == parent_value
  SearchSpace& add_int_if(const std::string& name, std::int64_t lo, std::int64_t hi,
                          const std::string& parent, const std::string& parent_value,
                          bool log_scale = false);
  SearchSpace& add_real_if(const std::string& name, double lo, double hi,
                           const std::string& parent, const std::string& parent_value,
                           bool log_scale = false);
  SearchSpace& add_categorical_if(const std::string& name, std::vector<std::string> categories,
                                  const std::string& parent, const std::string& parent_value);

  const std::vector<ParamSpec>& params() const { return params_; }
  bool has_conditionals() const;
  bool is_active(const ParamSpec& p, const Assignment& a) const;

  // throws ConfigError when an assignment misses an active parameter, carries
  // an inactive one, or falls outside a range
  void validate(const Assignment& a) const;

  Assignment sample(Rng& rng) const;

  // number of points when all parameters are integer/categorical, else 0
  std::size_t finite_size() const;

private:
  void check_new(const std::string& name, const std::string& parent,
                 const std::string& parent_value) const;
  std::vector<ParamSpec> params_;
};

struct Trial {
  std::size_t index = 0;
  Assignment assignment;
  double objective = 0.0;  // minimized
  bool failed = false;
  double wall_seconds = 0.0;
};

struct OptResult {
  Trial best;
  std::vector<Trial> trials;
};

using Objective = std::function<double(const Assignment&)>;

// index, parameters, objective, wall seconds per line
std::string trials_to_csv(const std::vector<Trial>& trials);

}  // namespace tids

#endif
