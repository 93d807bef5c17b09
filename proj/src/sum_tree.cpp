#include "tap/sum_tree.hpp"

#include <algorithm>

#include "tap/errors.hpp"
#include "tap/schema.hpp"

namespace tap {

Digest256 sum_leaf_hash(const SumLeafData& leaf) {
  HashWriter w;
  w.write_byte(0x00);
  for (const auto& c : leaf.commitments) w.write(c.data);
  w.write(leaf.id_hash);
  return w.finish();
}

Digest256 sum_internal_hash(const Digest256& left, const Digest256& right,
                            const std::vector<Commitment>& commitments, uint64_t count) {
  HashWriter w;
  w.write_byte(0x01);
  w.write(left);
  w.write(right);
  for (const auto& c : commitments) w.write(c.data);
  w.write_u64(count);
  return w.finish();
}

Digest256 sum_empty_hash() {
  HashWriter w;
  w.write_byte(0x00);
  return w.finish();
}

SumCoPathEntry sum_empty_entry(uint32_t z) {
  SumCoPathEntry entry;
  entry.hash = sum_empty_hash();
  entry.commitments.assign(z, Commitment::identity());
  entry.count = 0;
  entry.sibling_on_left = 0;
  return entry;
}

std::optional<SumPathResult> fold_sum_path(const SumLeafData& leaf,
                                           const std::vector<SumCoPathEntry>& copath,
                                           uint32_t z) {
  if (leaf.commitments.size() != z) return std::nullopt;
  try {
    SumPathResult out;
    out.root_hash = sum_leaf_hash(leaf);
    out.root_commitments = leaf.commitments;
    out.root_count = 1;
    // A bucket root is always an internal node, so an empty co-path cannot
    // reach it.
    if (copath.empty()) return std::nullopt;
    for (const auto& entry : copath) {
      if (entry.commitments.size() != z) return std::nullopt;
      std::vector<Commitment> combined(z);
      for (uint32_t j = 0; j < z; ++j) {
        combined[j] = add_commitments(out.root_commitments[j], entry.commitments[j]);
      }
      uint64_t count = out.root_count + entry.count;
      if (entry.sibling_on_left) {
        out.leaves_left += entry.count;
        out.root_hash = sum_internal_hash(entry.hash, out.root_hash, combined, count);
      } else {
        out.leaves_right += entry.count;
        out.root_hash = sum_internal_hash(out.root_hash, entry.hash, combined, count);
      }
      out.root_commitments = std::move(combined);
      out.root_count = count;
    }
    return out;
  } catch (const Error&) {
    return std::nullopt;
  }
}

namespace {

struct LevelNode {
  Digest256 hash{};
  std::vector<Commitment> commitments;
  uint64_t count = 0;
};

// One pairing round: (0,1), (2,3), ...; a trailing odd node is promoted
// unchanged. A single leaf is paired with the empty node so every bucket
// root is an internal node.
std::vector<LevelNode> next_level(const std::vector<LevelNode>& level, uint32_t z,
                                  bool pair_singleton) {
  std::vector<LevelNode> out;
  size_t n = level.size();
  if (n == 1 && pair_singleton) {
    LevelNode parent;
    parent.commitments = level[0].commitments;
    parent.count = level[0].count;
    parent.hash = sum_internal_hash(level[0].hash, sum_empty_hash(), parent.commitments,
                                    parent.count);
    out.push_back(std::move(parent));
    return out;
  }
  for (size_t i = 0; i + 1 < n; i += 2) {
    LevelNode parent;
    parent.commitments.resize(z);
    for (uint32_t j = 0; j < z; ++j) {
      parent.commitments[j] = add_commitments(level[i].commitments[j], level[i + 1].commitments[j]);
    }
    parent.count = level[i].count + level[i + 1].count;
    parent.hash = sum_internal_hash(level[i].hash, level[i + 1].hash, parent.commitments,
                                    parent.count);
    out.push_back(std::move(parent));
  }
  if (n % 2 == 1) out.push_back(level[n - 1]);
  return out;
}

}  // namespace

SumTree SumTree::build(std::vector<SumEntry> entries, uint32_t z) {
  if (entries.empty()) throw Error(ErrorCode::empty_bucket, "sum tree needs at least one value");
  if (z < 1 || z > 4) throw Error(ErrorCode::schema_mismatch, "z must be in [1,4]");
  for (const auto& e : entries) {
    if (e.value >= kValueDomain) {
      throw Error(ErrorCode::value_out_of_range, "value outside [0, 2^32)");
    }
  }

  SumTree tree;
  tree.z_ = z;
  std::sort(entries.begin(), entries.end(), [](const SumEntry& a, const SumEntry& b) {
    if (a.value != b.value) return a.value < b.value;
    return id_hash(a.user_id, a.time) < id_hash(b.user_id, b.time);
  });
  tree.entries_ = std::move(entries);
  tree.id_hashes_.reserve(tree.entries_.size());
  for (const auto& e : tree.entries_) tree.id_hashes_.push_back(id_hash(e.user_id, e.time));

  std::vector<Node> leaves;
  leaves.reserve(tree.entries_.size());
  for (size_t i = 0; i < tree.entries_.size(); ++i) {
    Node node;
    node.commitments = commit_powers(tree.entries_[i].value, tree.entries_[i].seed, z);
    node.count = 1;
    node.hash = sum_leaf_hash(SumLeafData{node.commitments, tree.id_hashes_[i]});
    leaves.push_back(std::move(node));
  }
  tree.levels_.push_back(std::move(leaves));
  while (tree.levels_.back().size() > 1 || tree.levels_.size() == 1) {
    std::vector<LevelNode> cur;
    cur.reserve(tree.levels_.back().size());
    for (const auto& n : tree.levels_.back()) cur.push_back(LevelNode{n.hash, n.commitments, n.count});
    auto next = next_level(cur, z, tree.levels_.size() == 1);
    std::vector<Node> stored;
    stored.reserve(next.size());
    for (auto& n : next) stored.push_back(Node{n.hash, std::move(n.commitments), n.count});
    tree.levels_.push_back(std::move(stored));
  }
  return tree;
}

const Digest256& SumTree::root_hash() const { return levels_.back()[0].hash; }

const std::vector<Commitment>& SumTree::root_commitments() const {
  return levels_.back()[0].commitments;
}

uint64_t SumTree::root_count() const { return levels_.back()[0].count; }

Scalar SumTree::total_seed() const {
  Scalar total = Scalar::zero();
  for (const auto& e : entries_) total = total.add(e.seed);
  return total;
}

std::pair<Digest256, Digest256> SumTree::root_child_hashes() const {
  const auto& below = levels_[levels_.size() - 2];
  if (below.size() == 1) return {below[0].hash, sum_empty_hash()};
  // The root pairs the two last-level survivors; with odd promotion the
  // level below the root always has exactly two nodes.
  return {below[0].hash, below[1].hash};
}

SumInclusionProof SumTree::inclusion_proof(size_t index) const {
  if (index >= entries_.size()) throw Error(ErrorCode::index_out_of_bounds, "leaf index");
  SumInclusionProof proof;
  proof.leaf = leaf_data(index);
  size_t pos = index;
  for (size_t depth = 0; depth + 1 < levels_.size(); ++depth) {
    const auto& level = levels_[depth];
    if (level.size() == 1) {
      // Singleton leaf level paired with the empty node.
      proof.copath.push_back(sum_empty_entry(z_));
      pos = 0;
      continue;
    }
    if (pos == level.size() - 1 && level.size() % 2 == 1) {
      pos /= 2;  // promoted, no sibling this round
      continue;
    }
    size_t sib = pos ^ 1;
    SumCoPathEntry entry;
    entry.hash = level[sib].hash;
    entry.commitments = level[sib].commitments;
    entry.count = level[sib].count;
    entry.sibling_on_left = sib < pos ? 1 : 0;
    proof.copath.push_back(std::move(entry));
    pos /= 2;
  }
  return proof;
}

std::optional<size_t> SumTree::leftmost_geq(uint64_t v) const {
  auto it = std::lower_bound(entries_.begin(), entries_.end(), v,
                             [](const SumEntry& e, uint64_t x) { return e.value < x; });
  if (it == entries_.end()) return std::nullopt;
  return static_cast<size_t>(it - entries_.begin());
}

std::optional<size_t> SumTree::rightmost_leq(uint64_t v) const {
  auto it = std::upper_bound(entries_.begin(), entries_.end(), v,
                             [](uint64_t x, const SumEntry& e) { return x < e.value; });
  if (it == entries_.begin()) return std::nullopt;
  return static_cast<size_t>(it - entries_.begin()) - 1;
}

std::optional<size_t> SumTree::find_user(const Digest256& target) const {
  for (size_t i = 0; i < id_hashes_.size(); ++i) {
    if (id_hashes_[i] == target) return i;
  }
  return std::nullopt;
}

uint64_t SumTree::value_at(size_t index) const {
  if (index >= entries_.size()) throw Error(ErrorCode::index_out_of_bounds, "leaf index");
  return entries_[index].value;
}

const Scalar& SumTree::seed_at(size_t index) const {
  if (index >= entries_.size()) throw Error(ErrorCode::index_out_of_bounds, "leaf index");
  return entries_[index].seed;
}

SumLeafData SumTree::leaf_data(size_t index) const {
  if (index >= entries_.size()) throw Error(ErrorCode::index_out_of_bounds, "leaf index");
  return SumLeafData{levels_[0][index].commitments, id_hashes_[index]};
}

std::vector<SumLeafData> SumTree::all_leaf_data() const {
  std::vector<SumLeafData> out;
  out.reserve(entries_.size());
  for (size_t i = 0; i < entries_.size(); ++i) out.push_back(leaf_data(i));
  return out;
}

Digest256 rebuild_sum_root(const std::vector<SumLeafData>& leaves, uint32_t z) {
  if (leaves.empty()) throw Error(ErrorCode::empty_bucket, "no leaves");
  std::vector<LevelNode> level;
  level.reserve(leaves.size());
  for (const auto& leaf : leaves) {
    LevelNode node;
    node.commitments = leaf.commitments;
    node.count = 1;
    node.hash = sum_leaf_hash(leaf);
    level.push_back(std::move(node));
  }
  bool first = true;
  while (level.size() > 1 || first) {
    level = next_level(level, z, first);
    first = false;
  }
  return level[0].hash;
}

}  // namespace tap
