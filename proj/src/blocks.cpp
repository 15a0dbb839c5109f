#include "dynsub/blocks.hpp"

#include <stdexcept>

namespace dynsub {

namespace {
int div_ceil(int a, int b) { return (a + b - 1) / b; }
}  // namespace

BlockStream::BlockStream(int start, int periods_T, int payload_bits)
    : start_(start), T_(periods_T), payload_bits_(payload_bits), block_bits_(div_ceil(payload_bits, periods_T)) {
  if (T_ < 1) throw std::invalid_argument("period length must be positive");
}

BitString BlockStream::block(int round) const {
  BitString out;
  int k = phase(round);
  out.append(static_cast<std::uint64_t>(k), index_bits());
  out.append(snapshot_.slice(static_cast<std::size_t>(k) * block_bits_, block_bits_));
  return out;
}

BlockAssembler::BlockAssembler(int periods_T, int payload_bits)
    : T_(periods_T), payload_bits_(payload_bits), block_bits_(div_ceil(payload_bits, periods_T)) {}

bool BlockAssembler::take(BitReader& r) {
  int k = static_cast<int>(r.read(ceil_log2(static_cast<std::uint64_t>(T_))));
  BitString slice;
  for (int i = 0; i < block_bits_; ++i) slice.push(r.bit());
  if (k == 0) {
    partial_ = BitString();
    expect_ = 0;
  }
  if (k != expect_) {
    expect_ = -1;  // missed a block; wait for the next period
    return false;
  }
  partial_.append(slice);
  ++expect_;
  if (expect_ == T_) {
    latest_ = partial_.prefix(payload_bits_);
    expect_ = -1;
    return true;
  }
  return false;
}

BitString id_bits(NodeId v, int n) {
  BitString s;
  s.append(static_cast<std::uint64_t>(v - 1), id_width(n));
  return s;
}

NodeId read_id(BitReader& r, int n) { return static_cast<NodeId>(r.read(id_width(n))) + 1; }

int one_distinct_bit(const BitString& x, const BitString& y) {
  if (x.size() != y.size()) throw std::invalid_argument("one_distinct_bit: length mismatch");
  for (std::size_t i = 0; i < x.size(); ++i)
    if (x[i] != y[i]) return static_cast<int>(i) + 1;
  throw std::invalid_argument("one_distinct_bit: equal strings");
}

void RecentRecords::expire(int now) {
  while (!edges_.empty() && now - edges_.front().round > d_) edges_.pop_front();
  while (!signals_.empty() && now - signals_.front().round > d_) signals_.pop_front();
}

void RecentRecords::add_edge(int round, std::vector<NodeId> nbrs, bool fresh) {
  edges_.push_back({round, std::move(nbrs), fresh});
}

void RecentRecords::add_signal(int round, std::vector<NodeId> senders) {
  signals_.push_back({round, std::move(senders)});
}

std::vector<int> RecentRecords::edge_offsets(int now) const {
  std::vector<int> out;
  for (auto it = edges_.rbegin(); it != edges_.rend(); ++it) {
    int o = now - it->round;
    if (o >= 1 && o <= d_) out.push_back(o);
  }
  return out;
}

std::vector<int> RecentRecords::signal_offsets(int now) const {
  std::vector<int> out;
  for (auto it = signals_.rbegin(); it != signals_.rend(); ++it) {
    int o = now - it->round;
    if (o >= 1 && o <= d_) out.push_back(o);
  }
  return out;
}

const RecentRecords::EdgeEntry* RecentRecords::edge_at(int now, int offset) const {
  for (const auto& e : edges_)
    if (now - e.round == offset) return &e;
  return nullptr;
}

const RecentRecords::SignalEntry* RecentRecords::signal_at(int now, int offset) const {
  for (const auto& s : signals_)
    if (now - s.round == offset) return &s;
  return nullptr;
}

}  // namespace dynsub
