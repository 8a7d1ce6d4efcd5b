#pragma once

#include <cstdint>
#include <vector>

#include "rcbdc/hash.hpp"

namespace rcbdc {

struct MerkleStep {
  Digest sibling;
  bool sibling_on_right;

  bool operator==(const MerkleStep&) const = default;
};

struct MerklePath {
  std::uint32_t leaf_index = 0;
  std::vector<MerkleStep> steps;  // bottom-up

  bool operator==(const MerklePath&) const = default;
};

inline Digest merkle_parent(const Digest& left, const Digest& right) {
  return Sha256().update(left).update(right).final();
}

namespace detail {

// One level up; an unpaired last node is promoted unchanged.
inline std::vector<Digest> merkle_level_up(const std::vector<Digest>& level) {
  std::vector<Digest> up;
  up.reserve((level.size() + 1) / 2);
  for (std::size_t i = 0; i + 1 < level.size(); i += 2) up.push_back(merkle_parent(level[i], level[i + 1]));
  if (level.size() % 2 == 1) up.push_back(level.back());
  return up;
}

}  // namespace detail

inline Digest merkle_root(const std::vector<Digest>& leaves) {
  enforce(!leaves.empty(), Errc::empty_leaves, "merkle tree needs at least one leaf");
  std::vector<Digest> level = leaves;
  while (level.size() > 1) level = detail::merkle_level_up(level);
  return level.front();
}

inline MerklePath inclusion_proof(const std::vector<Digest>& leaves, std::size_t index) {
  enforce(!leaves.empty(), Errc::empty_leaves, "merkle tree needs at least one leaf");
  enforce(index < leaves.size(), Errc::index_out_of_range, "leaf index out of range");
  MerklePath path;
  path.leaf_index = static_cast<std::uint32_t>(index);
  std::vector<Digest> level = leaves;
  std::size_t pos = index;
  while (level.size() > 1) {
    std::size_t sib = pos ^ 1;
    if (sib < level.size()) path.steps.push_back({level[sib], sib > pos});
    level = detail::merkle_level_up(level);
    pos /= 2;
  }
  return path;
}

inline Digest merkle_fold(const Digest& leaf, const MerklePath& path) {
  Digest acc = leaf;
  for (const auto& s : path.steps)
    acc = s.sibling_on_right ? merkle_parent(acc, s.sibling) : merkle_parent(s.sibling, acc);
  return acc;
}

inline bool verify_inclusion(const Digest& root, const Digest& leaf, const MerklePath& path) {
  return merkle_fold(leaf, path) == root;
}

inline void write(ByteWriter& w, const MerklePath& path) {
  w.u32(path.leaf_index).u32(static_cast<std::uint32_t>(path.steps.size()));
  for (const auto& s : path.steps) w.raw(ByteView(s.sibling)).u8(s.sibling_on_right ? 1 : 0);
}

inline MerklePath read_merkle_path(ByteReader& r) {
  MerklePath p;
  p.leaf_index = r.u32();
  std::uint32_t n = r.u32();
  enforce(n <= 64, r.error_code(), "merkle path too long");
  for (std::uint32_t i = 0; i < n; ++i) {
    MerkleStep s;
    s.sibling = r.array<32>();
    std::uint8_t side = r.u8();
    enforce(side <= 1, r.error_code(), "bad merkle side flag");
    s.sibling_on_right = side == 1;
    p.steps.push_back(s);
  }
  return p;
}

}  // namespace rcbdc
