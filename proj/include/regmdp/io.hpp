#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include "regmdp/mdp.hpp"
#include "regmdp/solver.hpp"

namespace regmdp {

/// 64-bit FNV-1a over raw bytes.
std::uint64_t fnv1a64(std::string_view bytes);

/// The hash string tools print and embed: "fnv1a64:" + 16 hex digits.
std::string content_hash(std::string_view bytes);

/// Serializes with 17 significant digits per double, so a reloaded file is
/// bitwise identical to the original and equal inputs give equal bytes.
std::string mdp_to_json(const TabularMdp& mdp);

/// Parses and validates; throws std::invalid_argument naming the first
/// problem (malformed text, missing field, or an invariant violation).
TabularMdp mdp_from_json(const std::string& text);

/// Solve provenance carried into solution files next to the numbers.
struct SolutionMeta {
  std::string regularizer;  // textual form the solver was given
  double lambda = 0.0;
  std::string method;  // "vi" or "rpi"
  double tol = 0.0;
  std::uint64_t max_iter = 0;
  std::string mdp_hash;  // content_hash of the MDP file that was solved
};

std::string solution_to_json(const Solution& sol, std::size_t n_states, std::size_t n_actions,
                             const SolutionMeta& meta);

/// Reads a whole file; throws std::runtime_error on failure.
std::string read_file(const std::string& path);

/// Writes via a temp file in the same directory plus rename, so concurrent
/// writers on distinct paths never interleave and readers never see a
/// partial file. Throws std::runtime_error on failure.
void write_file_atomic(const std::string& path, std::string_view content);

}  // namespace regmdp
