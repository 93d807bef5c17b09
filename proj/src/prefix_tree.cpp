#include "tap/prefix_tree.hpp"

#include <algorithm>
#include <functional>
#include <map>

#include "tap/errors.hpp"

namespace tap {

namespace {

uint8_t last_bit_byte(const BitString& key) {
  return key.empty() ? 0 : (key.bit(key.size() - 1) ? 1 : 0);
}

}  // namespace

Digest256 prefix_leaf_hash(const BitString& key, const Digest256& value) {
  HashWriter w;
  w.write_byte(0x02);
  w.write_byte(last_bit_byte(key));
  w.write(value);
  return w.finish();
}

Digest256 prefix_internal_hash(const BitString& key_fragment, const Digest256& left,
                               const Digest256& right) {
  HashWriter w;
  w.write_byte(0x03);
  w.write_byte(last_bit_byte(key_fragment));
  w.write(left);
  w.write(right);
  return w.finish();
}

Digest256 rebuild_prefix_root(const PrefixInclusionProof& proof) {
  std::map<uint32_t, Digest256> sib(proof.siblings.begin(), proof.siblings.end());
  Digest256 h = prefix_leaf_hash(proof.key, proof.leaf_value);
  for (size_t depth = proof.key.size(); depth-- > 0;) {
    Digest256 sibling = kAbsentChild;
    auto it = sib.find(static_cast<uint32_t>(depth + 1));
    if (it != sib.end()) sibling = it->second;
    BitString parent = proof.key.prefix(depth);
    bool node_is_right = proof.key.bit(depth);
    h = node_is_right ? prefix_internal_hash(parent, sibling, h)
                      : prefix_internal_hash(parent, h, sibling);
  }
  return h;
}

PrefixTree::PrefixTree(size_t key_length) : key_length_(key_length) {
  if (key_length == 0) throw Error(ErrorCode::malformed, "key length must be positive");
  time_bits_ = std::min<size_t>(kTimeBits, key_length);
  pool_.push_back(Node{});
  pool_[0].hash = prefix_internal_hash(BitString{}, kAbsentChild, kAbsentChild);
}

uint32_t PrefixTree::time_of(const BitString& key) const {
  return static_cast<uint32_t>(key.slice_uint(0, time_bits_));
}

void PrefixTree::insert(const BitString& key, const Digest256& value) {
  if (key.size() != key_length_) throw Error(ErrorCode::malformed, "wrong key length");
  uint32_t t = time_of(key);
  if (max_time_ && t < *max_time_) {
    throw Error(ErrorCode::time_regression, "key time precedes an existing key");
  }

  std::vector<uint32_t> path;
  path.reserve(key_length_ + 1);
  uint32_t cur = 0;
  path.push_back(cur);
  for (size_t depth = 0; depth < key_length_; ++depth) {
    bool bit = key.bit(depth);
    uint32_t& slot = bit ? pool_[cur].right : pool_[cur].left;
    if (slot == kNil) {
      slot = static_cast<uint32_t>(pool_.size());
      uint32_t fresh = slot;
      pool_.push_back(Node{});
      cur = fresh;
    } else {
      cur = slot;
    }
    path.push_back(cur);
  }
  if (pool_[cur].leaf >= 0) throw Error(ErrorCode::duplicate_key, key.to_string());

  pool_[cur].leaf = static_cast<int32_t>(leaves_.size());
  leaves_.emplace_back(key, value);
  max_time_ = max_time_ ? std::max(*max_time_, t) : t;

  for (size_t depth = key_length_ + 1; depth-- > 0;) {
    recompute_hash(path[depth], key.prefix(depth));
  }
}

void PrefixTree::recompute_hash(uint32_t node_index, const BitString& prefix) {
  Node& node = pool_[node_index];
  if (node.leaf >= 0) {
    node.hash = prefix_leaf_hash(prefix, leaves_[node.leaf].second);
    return;
  }
  Digest256 left = node.left == kNil ? kAbsentChild : pool_[node.left].hash;
  Digest256 right = node.right == kNil ? kAbsentChild : pool_[node.right].hash;
  node.hash = prefix_internal_hash(prefix, left, right);
}

Digest256 PrefixTree::digest() const { return pool_[0].hash; }

bool PrefixTree::contains(const BitString& key) const { return value_of(key).has_value(); }

std::optional<Digest256> PrefixTree::value_of(const BitString& key) const {
  if (key.size() != key_length_) return std::nullopt;
  uint32_t cur = 0;
  for (size_t depth = 0; depth < key_length_; ++depth) {
    uint32_t next = key.bit(depth) ? pool_[cur].right : pool_[cur].left;
    if (next == kNil) return std::nullopt;
    cur = next;
  }
  if (pool_[cur].leaf < 0) return std::nullopt;
  return leaves_[pool_[cur].leaf].second;
}

PrefixInclusionProof PrefixTree::inclusion_proof(const BitString& key) const {
  if (key.size() != key_length_) throw Error(ErrorCode::key_absent, "wrong key length");
  PrefixInclusionProof proof;
  proof.key = key;
  uint32_t cur = 0;
  for (size_t depth = 0; depth < key_length_; ++depth) {
    bool bit = key.bit(depth);
    uint32_t next = bit ? pool_[cur].right : pool_[cur].left;
    uint32_t sibling = bit ? pool_[cur].left : pool_[cur].right;
    if (next == kNil) throw Error(ErrorCode::key_absent, key.to_string());
    if (sibling != kNil) {
      proof.siblings.emplace_back(static_cast<uint32_t>(depth + 1), pool_[sibling].hash);
    }
    cur = next;
  }
  if (pool_[cur].leaf < 0) throw Error(ErrorCode::key_absent, key.to_string());
  proof.leaf_value = leaves_[pool_[cur].leaf].second;
  return proof;
}

std::vector<std::pair<BitString, Digest256>> PrefixTree::leaves() const { return leaves_; }

CoverEntry* PrefixTree::build_cover(uint32_t node_index, const BitString& prefix,
                                    const Schema& schema, const RangeSpec& spec,
                                    RangeCoverProof& out) const {
  // Alg 1: a node enters N' iff its prefix overlaps S*; recursion continues
  // into existing children. Non-overlapping children stay as pruned hashes.
  const Node& node = pool_[node_index];
  size_t self = out.nodes.size();
  out.nodes.push_back(CoverEntry{});
  if (node.leaf >= 0) {
    out.nodes[self].is_leaf = 1;
    out.nodes[self].leaf_value = leaves_[node.leaf].second;
    return &out.nodes[self];
  }
  for (int side = 0; side < 2; ++side) {
    uint32_t child = side == 0 ? node.left : node.right;
    if (child == kNil) continue;
    BitString child_prefix = prefix;
    child_prefix.append_bit(side == 1);
    uint8_t kind;
    if (range_overlap(schema, spec, child_prefix)) {
      kind = 2;
      build_cover(child, child_prefix, schema, spec, out);
    } else {
      kind = 1;
    }
    // vector may have reallocated during recursion
    CoverEntry& entry = out.nodes[self];
    if (side == 0) {
      entry.left_kind = kind;
      if (kind == 1) entry.left_hash = pool_[child].hash;
    } else {
      entry.right_kind = kind;
      if (kind == 1) entry.right_hash = pool_[child].hash;
    }
  }
  return &out.nodes[self];
}

RangeCoverProof PrefixTree::range_cover(const Schema& schema, const RangeSpec& spec) const {
  spec.validate(schema);
  RangeCoverProof proof;
  if (range_overlap(schema, spec, BitString{})) {
    build_cover(0, BitString{}, schema, spec, proof);
  }
  return proof;
}

namespace {

struct CoverWalk {
  const Schema& schema;
  const RangeSpec& spec;
  const std::vector<CoverEntry>& nodes;
  size_t key_length;
  size_t cursor = 0;
  std::vector<CoverLeaf> leaves;

  std::optional<Digest256> walk(const BitString& prefix) {
    if (cursor >= nodes.size()) return std::nullopt;
    const CoverEntry entry = nodes[cursor++];
    if (!range_overlap(schema, spec, prefix)) return std::nullopt;
    if (entry.is_leaf) {
      if (prefix.size() != key_length) return std::nullopt;
      if (entry.left_kind != 0 || entry.right_kind != 0) return std::nullopt;
      leaves.push_back(CoverLeaf{prefix, entry.leaf_value});
      return prefix_leaf_hash(prefix, entry.leaf_value);
    }
    if (prefix.size() >= key_length) return std::nullopt;
    Digest256 child_hash[2];
    for (int side = 0; side < 2; ++side) {
      uint8_t kind = side == 0 ? entry.left_kind : entry.right_kind;
      BitString child_prefix = prefix;
      child_prefix.append_bit(side == 1);
      switch (kind) {
        case 0:
          child_hash[side] = kAbsentChild;
          break;
        case 1: {
          // Pruned subtrees must be outside the range, or the cover is
          // incomplete.
          if (range_overlap(schema, spec, child_prefix)) return std::nullopt;
          child_hash[side] = side == 0 ? entry.left_hash : entry.right_hash;
          if (child_hash[side] == kAbsentChild) return std::nullopt;
          break;
        }
        case 2: {
          auto sub = walk(child_prefix);
          if (!sub) return std::nullopt;
          child_hash[side] = *sub;
          break;
        }
        default:
          return std::nullopt;
      }
    }
    return prefix_internal_hash(prefix, child_hash[0], child_hash[1]);
  }
};

}  // namespace

std::optional<std::vector<CoverLeaf>> check_range_cover(const Schema& schema,
                                                        const RangeSpec& spec,
                                                        const RangeCoverProof& proof,
                                                        const Digest256& digest) {
  try {
    spec.validate(schema);
  } catch (const Error&) {
    return std::nullopt;
  }
  if (proof.nodes.empty()) return std::nullopt;
  CoverWalk walk{schema, spec, proof.nodes, schema.key_length(), 0, {}};
  auto root = walk.walk(BitString{});
  if (!root || walk.cursor != proof.nodes.size()) return std::nullopt;
  if (!(*root == digest)) return std::nullopt;
  return walk.leaves;
}

bool verify_range_cover(const Schema& schema, const RangeSpec& spec, const RangeCoverProof& proof,
                        const Digest256& digest) {
  return check_range_cover(schema, spec, proof, digest).has_value();
}

ExtensionProof make_extension_proof(const PrefixTree& old_tree, const PrefixTree& new_tree,
                                    uint32_t t_old, uint32_t t_new) {
  if (old_tree.key_length() != new_tree.key_length()) {
    throw Error(ErrorCode::malformed, "key length mismatch");
  }
  if (t_new < t_old) throw Error(ErrorCode::epoch_out_of_order, "t_new < t_old");
  ExtensionProof proof;
  proof.t_old = t_old;
  proof.t_new = t_new;

  std::vector<BitString> new_keys;
  for (const auto& [key, value] : new_tree.leaves()) {
    if (!old_tree.contains(key)) {
      proof.new_leaves.push_back(ExtensionLeaf{key, value});
      new_keys.push_back(key);
    }
  }
  std::sort(proof.new_leaves.begin(), proof.new_leaves.end(),
            [](const auto& a, const auto& b) { return a.key < b.key; });

  // Frontier: maximal subtrees of the old tree that contain no new-leaf path.
  std::function<void(uint32_t, const BitString&)> walk = [&](uint32_t index,
                                                             const BitString& prefix) {
    bool on_new_path = std::any_of(new_keys.begin(), new_keys.end(), [&](const BitString& k) {
      return prefix.is_prefix_of(k);
    });
    if (!on_new_path) {
      proof.frontier.push_back(FrontierEntry{prefix, old_tree.pool_[index].hash});
      return;
    }
    const auto& node = old_tree.pool_[index];
    if (node.left != PrefixTree::kNil) {
      BitString p = prefix;
      p.append_bit(false);
      walk(node.left, p);
    }
    if (node.right != PrefixTree::kNil) {
      BitString p = prefix;
      p.append_bit(true);
      walk(node.right, p);
    }
  };
  if (old_tree.leaf_count() > 0) {
    walk(0, BitString{});
  } else if (proof.new_leaves.empty()) {
    proof.frontier.push_back(FrontierEntry{BitString{}, old_tree.digest()});
  }
  return proof;
}

namespace {

// Recursively recombines a set of positioned hashes (subtree roots and leaf
// values) into the root digest. Entries must be prefix-free.
struct EntrySet {
  std::vector<std::pair<BitString, Digest256>> entries;  // sorted by key

  std::optional<Digest256> fold(const BitString& prefix, size_t begin, size_t end,
                                size_t key_length) const {
    if (begin == end) return kAbsentChild;
    if (end - begin == 1 && entries[begin].first == prefix) return entries[begin].second;
    if (prefix.size() >= key_length) return std::nullopt;  // entry below a full key
    // Any entry at or above the current prefix alongside deeper ones is
    // ill-formed.
    for (size_t i = begin; i < end; ++i) {
      if (entries[i].first.size() <= prefix.size()) return std::nullopt;
    }
    size_t mid = begin;
    while (mid < end && !entries[mid].first.bit(prefix.size())) ++mid;
    BitString left = prefix, right = prefix;
    left.append_bit(false);
    right.append_bit(true);
    auto lh = fold(left, begin, mid, key_length);
    auto rh = fold(right, mid, end, key_length);
    if (!lh || !rh) return std::nullopt;
    return prefix_internal_hash(prefix, *lh, *rh);
  }

  std::optional<Digest256> root(size_t key_length) const {
    BitString empty;
    if (entries.empty()) return prefix_internal_hash(empty, kAbsentChild, kAbsentChild);
    if (entries.size() == 1 && entries[0].first.empty()) return entries[0].second;
    auto h = fold(empty, 0, entries.size(), key_length);
    if (!h) return std::nullopt;
    if (*h == kAbsentChild) return prefix_internal_hash(empty, kAbsentChild, kAbsentChild);
    return h;
  }
};

}  // namespace

bool verify_extension(size_t key_length, const ExtensionProof& proof, const Digest256& digest_old,
                      const Digest256& digest_new) {
  try {
    if (proof.t_new < proof.t_old) return false;
    size_t time_bits = std::min<size_t>(kTimeBits, key_length);

    EntrySet old_set;
    for (const auto& entry : proof.frontier) {
      if (entry.prefix.size() > key_length) return false;
      old_set.entries.emplace_back(entry.prefix, entry.hash);
    }
    std::sort(old_set.entries.begin(), old_set.entries.end());
    for (size_t i = 0; i + 1 < old_set.entries.size(); ++i) {
      if (old_set.entries[i].first == old_set.entries[i + 1].first) return false;
      if (old_set.entries[i].first.is_prefix_of(old_set.entries[i + 1].first)) return false;
    }

    EntrySet new_set = old_set;
    for (const auto& leaf : proof.new_leaves) {
      if (leaf.key.size() != key_length) return false;
      uint64_t t = leaf.key.slice_uint(0, time_bits);
      if (t <= proof.t_old || t > proof.t_new) return false;
      for (const auto& f : proof.frontier) {
        if (f.prefix.is_prefix_of(leaf.key)) return false;
      }
      new_set.entries.emplace_back(leaf.key, prefix_leaf_hash(leaf.key, leaf.value));
    }
    std::sort(new_set.entries.begin(), new_set.entries.end());
    for (size_t i = 0; i + 1 < new_set.entries.size(); ++i) {
      if (new_set.entries[i].first == new_set.entries[i + 1].first) return false;
    }

    auto old_root = old_set.root(key_length);
    auto new_root = new_set.root(key_length);
    if (!old_root || !new_root) return false;
    return *old_root == digest_old && *new_root == digest_new;
  } catch (const Error&) {
    return false;
  }
}

}  // namespace tap
