#include "entropic/config.hpp"

#include <openssl/evp.h>

#include <fstream>
#include <iomanip>
#include <sstream>

#include "entropic/error.hpp"
#include "json.hpp"

namespace entropic {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& msg) { throw Error(ErrorCode::kConfig, msg); }

std::string_view init_name(InitKind k) {
  switch (k) {
    case InitKind::kUniform: return "uniform";
    case InitKind::kRandom: return "random";
    case InitKind::kPeaked: return "peaked";
    case InitKind::kExplicit: return "explicit";
  }
  return "random";
}

std::string_view filter_name(SampleFilter f) {
  switch (f) {
    case SampleFilter::kNone: return "none";
    case SampleFilter::kPositiveOnly: return "positive_only";
    case SampleFilter::kNegativeOnly: return "negative_only";
  }
  return "none";
}

json to_json(const ScenarioConfig& c) {
  json j;
  j["task"] = {{"num_actions", c.task.num_actions},
               {"num_positive", c.task.num_positive},
               {"positive_set", c.task.positive_set},
               {"reward_pos", c.task.reward_pos},
               {"reward_neg", c.task.reward_neg},
               {"seed", c.task.seed ? json(*c.task.seed) : json(nullptr)}};
  j["num_states"] = c.num_states;
  j["policy_init"] = {{"kind", init_name(c.policy_init.kind)},
                      {"scale", c.policy_init.scale},
                      {"concentration", c.policy_init.concentration},
                      {"logits", c.policy_init.logits},
                      {"seed", c.policy_init.seed ? json(*c.policy_init.seed) : json(nullptr)}};
  j["mode"] = {{"kind", c.mode.kind == ModeKind::kExact ? "exact" : "sampled"},
               {"group_size", c.mode.group_size},
               {"temperature", c.mode.temperature}};
  j["loss"] = {{"kind", to_string(c.loss.kind)},
               {"tau", c.loss.tau},
               {"eps_low", c.loss.eps_low},
               {"eps_high", c.loss.eps_high}};
  j["controller"] = {{"enabled", c.controller.enabled},
                     {"k_p", c.controller.k_p},
                     {"k_i", c.controller.k_i},
                     {"target_entropy", c.controller.target_entropy},
                     {"clamp", c.controller.clamp},
                     {"anti_windup", c.controller.anti_windup}};
  j["controller_start_step"] = c.controller_start_step;
  j["staleness"] = c.staleness;
  j["eta"] = c.eta;
  j["steps"] = c.steps;
  j["seed"] = c.seed;
  j["sample_filter"] = filter_name(c.sample_filter);
  j["advantage_scale"] = c.advantage_scale == AdvantageScale::kUnit ? "unit" : "grpo_limit";
  j["mask"] = {{"p_hi", c.mask.p_hi},
               {"p_lo", c.mask.p_lo},
               {"n_hi", c.mask.n_hi},
               {"n_lo", c.mask.n_lo},
               {"prob_split", c.mask.prob_split ? json(*c.mask.prob_split) : json(nullptr)}};
  return j;
}

const json& defaults() {
  static const json d = to_json(ScenarioConfig{});
  return d;
}

// Keys whose default is null but which accept a number.
bool nullable_number(const std::string& path) {
  return path == "task.seed" || path == "policy_init.seed" || path == "mask.prob_split";
}

void check_schema(const json& input, const json& schema, const std::string& prefix) {
  if (!input.is_object()) fail((prefix.empty() ? "config" : prefix) + ": expected an object");
  for (const auto& [key, value] : input.items()) {
    const std::string path = prefix.empty() ? key : prefix + "." + key;
    if (!schema.contains(key)) fail("unknown key '" + path + "'");
    const json& expected = schema.at(key);
    if (expected.is_object()) {
      check_schema(value, expected, path);
    } else if (nullable_number(path)) {
      if (!value.is_null() && !value.is_number()) fail("'" + path + "': expected a number or null");
    } else if (expected.is_boolean() && !value.is_boolean()) {
      fail("'" + path + "': expected true or false");
    } else if (expected.is_number() && !value.is_number()) {
      fail("'" + path + "': expected a number");
    } else if (expected.is_string() && !value.is_string()) {
      fail("'" + path + "': expected a string");
    } else if (expected.is_array()) {
      if (!value.is_array()) fail("'" + path + "': expected an array of numbers");
      for (const auto& x : value) {
        if (!x.is_number()) fail("'" + path + "': expected an array of numbers");
      }
    }
  }
}

std::uint64_t get_uint(const json& j, const std::string& path) {
  if (j.is_number_unsigned()) return j.get<std::uint64_t>();
  if (j.is_number_integer()) {
    fail("'" + path + "' = " + j.dump() + " out of range: expected an integer >= 0");
  }
  const double x = j.get<double>();
  if (x < 0 || x != static_cast<double>(static_cast<std::uint64_t>(x))) {
    fail("'" + path + "' = " + j.dump() + " out of range: expected an integer >= 0");
  }
  return static_cast<std::uint64_t>(x);
}

double get_real(const json& j, const std::string& path) {
  const double x = j.get<double>();
  if (!std::isfinite(x)) fail("'" + path + "': expected a finite number");
  return x;
}

void merge(json& base, const json& patch) {
  for (const auto& [key, value] : patch.items()) {
    if (value.is_object() && base.contains(key) && base[key].is_object()) {
      merge(base[key], value);
    } else {
      base[key] = value;
    }
  }
}

ScenarioConfig from_json(const json& j) {
  ScenarioConfig c;
  const json& t = j.at("task");
  c.task.num_actions = get_uint(t.at("num_actions"), "task.num_actions");
  c.task.num_positive = get_uint(t.at("num_positive"), "task.num_positive");
  c.task.positive_set.clear();
  for (const auto& x : t.at("positive_set")) {
    c.task.positive_set.push_back(get_uint(x, "task.positive_set"));
  }
  c.task.reward_pos = get_real(t.at("reward_pos"), "task.reward_pos");
  c.task.reward_neg = get_real(t.at("reward_neg"), "task.reward_neg");
  if (!t.at("seed").is_null()) c.task.seed = get_uint(t.at("seed"), "task.seed");
  c.num_states = get_uint(j.at("num_states"), "num_states");

  const json& pi = j.at("policy_init");
  const std::string kind = pi.at("kind").get<std::string>();
  if (kind == "uniform") c.policy_init.kind = InitKind::kUniform;
  else if (kind == "random") c.policy_init.kind = InitKind::kRandom;
  else if (kind == "peaked") c.policy_init.kind = InitKind::kPeaked;
  else if (kind == "explicit") c.policy_init.kind = InitKind::kExplicit;
  else fail("'policy_init.kind' = \"" + kind + "\": expected uniform, random, peaked or explicit");
  c.policy_init.scale = get_real(pi.at("scale"), "policy_init.scale");
  c.policy_init.concentration = get_real(pi.at("concentration"), "policy_init.concentration");
  c.policy_init.logits.clear();
  for (const auto& x : pi.at("logits")) c.policy_init.logits.push_back(get_real(x, "policy_init.logits"));
  if (!pi.at("seed").is_null()) c.policy_init.seed = get_uint(pi.at("seed"), "policy_init.seed");

  const json& m = j.at("mode");
  const std::string mode = m.at("kind").get<std::string>();
  if (mode == "exact") c.mode.kind = ModeKind::kExact;
  else if (mode == "sampled") c.mode.kind = ModeKind::kSampled;
  else fail("'mode.kind' = \"" + mode + "\": expected exact or sampled");
  c.mode.group_size = get_uint(m.at("group_size"), "mode.group_size");
  c.mode.temperature = get_real(m.at("temperature"), "mode.temperature");

  const json& l = j.at("loss");
  c.loss.kind = loss_kind_from_string(l.at("kind").get<std::string>());
  c.loss.tau = get_real(l.at("tau"), "loss.tau");
  c.loss.eps_low = get_real(l.at("eps_low"), "loss.eps_low");
  c.loss.eps_high = get_real(l.at("eps_high"), "loss.eps_high");

  const json& k = j.at("controller");
  c.controller.enabled = k.at("enabled").get<bool>();
  c.controller.k_p = get_real(k.at("k_p"), "controller.k_p");
  c.controller.k_i = get_real(k.at("k_i"), "controller.k_i");
  c.controller.target_entropy = get_real(k.at("target_entropy"), "controller.target_entropy");
  c.controller.clamp = k.at("clamp").get<bool>();
  c.controller.anti_windup = k.at("anti_windup").get<bool>();

  c.controller_start_step = get_uint(j.at("controller_start_step"), "controller_start_step");
  c.staleness = get_uint(j.at("staleness"), "staleness");
  c.eta = get_real(j.at("eta"), "eta");
  c.steps = get_uint(j.at("steps"), "steps");
  c.seed = get_uint(j.at("seed"), "seed");

  const std::string filter = j.at("sample_filter").get<std::string>();
  if (filter == "none") c.sample_filter = SampleFilter::kNone;
  else if (filter == "positive_only") c.sample_filter = SampleFilter::kPositiveOnly;
  else if (filter == "negative_only") c.sample_filter = SampleFilter::kNegativeOnly;
  else fail("'sample_filter' = \"" + filter + "\": expected none, positive_only or negative_only");

  const std::string scale = j.at("advantage_scale").get<std::string>();
  if (scale == "unit") c.advantage_scale = AdvantageScale::kUnit;
  else if (scale == "grpo_limit") c.advantage_scale = AdvantageScale::kGrpoLimit;
  else fail("'advantage_scale' = \"" + scale + "\": expected unit or grpo_limit");

  const json& mk = j.at("mask");
  c.mask.p_hi = mk.at("p_hi").get<bool>();
  c.mask.p_lo = mk.at("p_lo").get<bool>();
  c.mask.n_hi = mk.at("n_hi").get<bool>();
  c.mask.n_lo = mk.at("n_lo").get<bool>();
  if (!mk.at("prob_split").is_null()) c.mask.prob_split = get_real(mk.at("prob_split"), "mask.prob_split");
  return c;
}

json parse_json(std::string_view text) {
  try {
    if (text.find_first_not_of(" \t\r\n") == std::string_view::npos) return json::object();
    return json::parse(text);
  } catch (const json::parse_error& e) {
    fail(std::string("config is not valid JSON: ") + e.what());
  }
}

}  // namespace

ScenarioConfig parse_config(std::string_view text) {
  const json input = parse_json(text);
  check_schema(input, defaults(), "");
  json merged = defaults();
  merge(merged, input);
  ScenarioConfig c = from_json(merged);
  c.validate();
  return c;
}

std::string serialize_config(const ScenarioConfig& config) { return to_json(config).dump(2) + "\n"; }

std::string config_hash(const ScenarioConfig& config) {
  const std::string canonical = to_json(config).dump();
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(canonical.data(), canonical.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw Error(ErrorCode::kIo, "config_hash: SHA-256 digest failed");
  }
  std::ostringstream hex;
  for (unsigned int i = 0; i < len; ++i) {
    hex << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(digest[i]);
  }
  return hex.str();
}

std::string apply_overrides(std::string_view text,
                            const std::vector<std::pair<std::string, std::string>>& overrides) {
  json doc = parse_json(text);
  if (!doc.is_object()) fail("config: expected an object");
  for (const auto& [key, raw] : overrides) {
    const json* schema = &defaults();
    json* node = &doc;
    std::stringstream parts(key);
    std::string part;
    std::vector<std::string> path;
    while (std::getline(parts, part, '.')) path.push_back(part);
    if (path.empty()) fail("empty override key");
    for (std::size_t i = 0; i < path.size(); ++i) {
      if (!schema->is_object() || !schema->contains(path[i])) fail("unknown key '" + key + "'");
      schema = &schema->at(path[i]);
      if (i + 1 < path.size()) {
        if (!node->contains(path[i])) (*node)[path[i]] = json::object();
        node = &(*node)[path[i]];
      }
    }
    json value;
    try {
      value = json::parse(raw);
    } catch (const json::parse_error&) {
      value = raw;
    }
    (*node)[path.back()] = value;
  }
  return doc.dump(2);
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open '" + path + "' for reading");
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw Error(ErrorCode::kIo, "read failure on '" + path + "'");
  return buf.str();
}

std::string RunManifest::to_json() const {
  json j = {{"config_hash", config_hash},
            {"artifact_version", artifact_version},
            {"seed", seed},
            {"output_paths", output_paths}};
  return j.dump(2) + "\n";
}

std::string_view artifact_version() { return ENTROPIC_VERSION; }

}  // namespace entropic
