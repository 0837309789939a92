#include "regmdp/io.hpp"

#include <unistd.h>

#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace regmdp {

namespace {

using nlohmann::json;

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void append_array(std::string& out, const std::vector<double>& values, const char* indent) {
  out += "[";
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i % 8 == 0) {
      out += "\n";
      out += indent;
    } else {
      out += " ";
    }
    out += fmt(values[i]);
    if (i + 1 < values.size()) out += ",";
  }
  out += "\n";
  out.append(indent, std::strlen(indent) >= 2 ? std::strlen(indent) - 2 : 0);
  out += "]";
}

std::string quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      default:
        if (static_cast<unsigned char>(c) < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof buf, "\\u%04x", c);
          out += buf;
        } else {
          out += c;
        }
    }
  }
  return out + "\"";
}

const json& field(const json& j, const char* name) {
  auto it = j.find(name);
  if (it == j.end()) throw std::invalid_argument(std::string("missing field: ") + name);
  return *it;
}

std::vector<double> doubles(const json& j, const char* name, std::size_t expected) {
  const json& arr = field(j, name);
  if (!arr.is_array())
    throw std::invalid_argument(std::string("field is not an array: ") + name);
  if (arr.size() != expected)
    throw std::invalid_argument(std::string(name) + ": expected " + std::to_string(expected) +
                                " entries, found " + std::to_string(arr.size()));
  std::vector<double> out;
  out.reserve(arr.size());
  for (const json& v : arr) {
    if (!v.is_number())
      throw std::invalid_argument(std::string(name) + ": non-numeric entry");
    out.push_back(v.get<double>());
  }
  return out;
}

}  // namespace

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string content_hash(std::string_view bytes) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "fnv1a64:%016llx",
                static_cast<unsigned long long>(fnv1a64(bytes)));
  return buf;
}

std::string mdp_to_json(const TabularMdp& mdp) {
  std::string out;
  out.reserve(32 * (mdp.transition.size() + mdp.reward.v.size() + mdp.initial.size()) + 512);
  out += "{\n";
  out += "  \"schema\": \"regmdp.mdp.v1\",\n";
  out += "  \"n_states\": " + std::to_string(mdp.n_states) + ",\n";
  out += "  \"n_actions\": " + std::to_string(mdp.n_actions) + ",\n";
  out += "  \"gamma\": " + fmt(mdp.gamma) + ",\n";
  out += "  \"r_max\": " + fmt(mdp.r_max) + ",\n";
  out += "  \"provenance\": {\n";
  out += "    \"generator\": " + quote(mdp.generator) + ",\n";
  out += "    \"seed\": " + std::to_string(mdp.seed) + ",\n";
  out += "    \"clip_prob\": " + fmt(mdp.clip_prob) + "\n";
  out += "  },\n";
  out += "  \"initial\": ";
  append_array(out, mdp.initial, "    ");
  out += ",\n  \"reward\": ";
  append_array(out, mdp.reward.v, "    ");
  out += ",\n  \"transition\": ";
  append_array(out, mdp.transition, "    ");
  out += "\n}\n";
  return out;
}

TabularMdp mdp_from_json(const std::string& text) {
  TabularMdp mdp;
  try {
    const json j = json::parse(text);
    if (!j.is_object()) throw std::invalid_argument("top level is not an object");

    const json& ns = field(j, "n_states");
    const json& na = field(j, "n_actions");
    if (!ns.is_number_unsigned() || !na.is_number_unsigned())
      throw std::invalid_argument("n_states/n_actions must be non-negative integers");
    mdp.n_states = ns.get<std::size_t>();
    mdp.n_actions = na.get<std::size_t>();
    mdp.gamma = field(j, "gamma").get<double>();
    mdp.r_max = field(j, "r_max").get<double>();

    const std::size_t S = mdp.n_states, A = mdp.n_actions;
    mdp.initial = doubles(j, "initial", S);
    mdp.reward = Table(S, A);
    mdp.reward.v = doubles(j, "reward", S * A);
    mdp.transition = doubles(j, "transition", S * A * S);

    const json& prov = field(j, "provenance");
    mdp.generator = field(prov, "generator").get<std::string>();
    mdp.seed = field(prov, "seed").get<std::uint64_t>();
    mdp.clip_prob = field(prov, "clip_prob").get<double>();
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("mdp file: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument(std::string("mdp file: ") + e.what());
  }

  const std::vector<std::string> problems = validate(mdp);
  if (!problems.empty()) throw std::invalid_argument("mdp file: " + problems.front());
  return mdp;
}

std::string solution_to_json(const Solution& sol, std::size_t n_states, std::size_t n_actions,
                             const SolutionMeta& meta) {
  std::string out;
  out.reserve(32 * (sol.q_star.v.size() * 2 + sol.v_star.size() * 2) + 512);
  out += "{\n";
  out += "  \"schema\": \"regmdp.solution.v1\",\n";
  out += "  \"regularizer\": " + quote(meta.regularizer) + ",\n";
  out += "  \"lambda\": " + fmt(meta.lambda) + ",\n";
  out += "  \"method\": " + quote(meta.method) + ",\n";
  out += "  \"tol\": " + fmt(meta.tol) + ",\n";
  out += "  \"max_iter\": " + std::to_string(meta.max_iter) + ",\n";
  out += "  \"mdp_hash\": " + quote(meta.mdp_hash) + ",\n";
  out += "  \"n_states\": " + std::to_string(n_states) + ",\n";
  out += "  \"n_actions\": " + std::to_string(n_actions) + ",\n";
  out += "  \"iterations\": " + std::to_string(sol.iterations) + ",\n";
  out += "  \"final_residual\": " + fmt(sol.final_residual) + ",\n";
  out += "  \"v_star\": ";
  append_array(out, sol.v_star, "    ");
  out += ",\n  \"q_star\": ";
  append_array(out, sol.q_star.v, "    ");
  out += ",\n  \"policy\": ";
  append_array(out, sol.policy.v, "    ");
  out += ",\n  \"mu\": ";
  append_array(out, sol.mu, "    ");
  out += "\n}\n";
  return out;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  if (!in.good() && !in.eof()) throw std::runtime_error("read failed: " + path);
  return buf.str();
}

void write_file_atomic(const std::string& path, std::string_view content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  fs::path dir = target.parent_path();
  if (dir.empty()) dir = ".";
  const fs::path tmp =
      dir / (target.filename().string() + ".tmp." + std::to_string(::getpid()));
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot create " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out.good()) {
      std::error_code ec;
      fs::remove(tmp, ec);
      throw std::runtime_error("write failed: " + tmp.string());
    }
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    std::error_code ec2;
    fs::remove(tmp, ec2);
    throw std::runtime_error("rename to " + path + " failed: " + ec.message());
  }
}

}  // namespace regmdp
