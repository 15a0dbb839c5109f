#pragma once

#include <deque>
#include <optional>
#include <vector>

#include "dynsub/bits.hpp"
#include "dynsub/graph.hpp"

namespace dynsub {

// Payload of `payload_bits` streamed in T blocks, one per round, starting
// at `start` and repeating. Block k of a period carries bits
// [k*B, (k+1)*B) of the snapshot frozen at the period's first round.
class BlockStream {
 public:
  BlockStream() = default;
  BlockStream(int start, int periods_T, int payload_bits);

  int start() const { return start_; }
  int T() const { return T_; }
  int block_bits() const { return block_bits_; }
  int index_bits() const { return ceil_log2(static_cast<std::uint64_t>(T_)); }
  int phase(int round) const { return (round - start_) % T_; }
  bool period_start(int round) const { return round >= start_ && phase(round) == 0; }
  bool period_end(int round) const { return round >= start_ && phase(round) == T_ - 1; }

  void freeze(BitString snapshot) { snapshot_ = std::move(snapshot); }
  const BitString& snapshot() const { return snapshot_; }
  // [block index][slice] for this round.
  BitString block(int round) const;

 private:
  int start_ = 1;
  int T_ = 1;
  int payload_bits_ = 0;
  int block_bits_ = 0;
  BitString snapshot_;
};

// Receiver side: keeps the latest fully assembled snapshot.
class BlockAssembler {
 public:
  BlockAssembler() = default;
  BlockAssembler(int periods_T, int payload_bits);

  // Reads [index][slice] from r; returns true when a payload just completed.
  bool take(BitReader& r);
  const std::optional<BitString>& latest() const { return latest_; }
  void set_latest(BitString s) { latest_ = std::move(s); }

 private:
  int T_ = 1;
  int payload_bits_ = 0;
  int block_bits_ = 0;
  int expect_ = 0;
  BitString partial_;
  std::optional<BitString> latest_;
};

// ID(v) as an L-bit string of v-1, most significant first.
BitString id_bits(NodeId v, int n);
NodeId read_id(BitReader& r, int n);

// First differing position (1-indexed) of two equal-length distinct strings.
int one_distinct_bit(const BitString& x, const BitString& y);

// Round-stamped history of the last d rounds: own new edges and received signals.
class RecentRecords {
 public:
  struct EdgeEntry {
    int round;
    std::vector<NodeId> nbrs;
    bool fresh;  // gained a freshly inserted neighbor
  };
  struct SignalEntry {
    int round;
    std::vector<NodeId> senders;
  };

  explicit RecentRecords(int d = 1) : d_(d) {}
  int d() const { return d_; }

  // Forget entries more than d rounds before `now`.
  void expire(int now);
  void add_edge(int round, std::vector<NodeId> nbrs, bool fresh);
  void add_signal(int round, std::vector<NodeId> senders);

  // Offsets in [1, d] relative to `now`, ascending.
  std::vector<int> edge_offsets(int now) const;
  std::vector<int> signal_offsets(int now) const;
  const EdgeEntry* edge_at(int now, int offset) const;
  const SignalEntry* signal_at(int now, int offset) const;
  const std::deque<EdgeEntry>& edges() const { return edges_; }

 private:
  int d_;
  std::deque<EdgeEntry> edges_;
  std::deque<SignalEntry> signals_;
};

}  // namespace dynsub
