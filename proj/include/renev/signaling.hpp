#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <ostream>
#include <string_view>
#include <vector>

namespace renev {

enum class X2MessageKind {
  ResourceStatusRequest,
  ResourceStatusResponse,
  LoadInformation,
  MetasignallingInformationRequest,
  MetasignallingInformationAcknowledge,
};

inline constexpr std::size_t kX2MessageKinds = 5;

inline constexpr std::string_view to_string(X2MessageKind k) {
  switch (k) {
    case X2MessageKind::ResourceStatusRequest: return "RESOURCE_STATUS_REQUEST";
    case X2MessageKind::ResourceStatusResponse: return "RESOURCE_STATUS_RESPONSE";
    case X2MessageKind::LoadInformation: return "LOAD_INFORMATION";
    case X2MessageKind::MetasignallingInformationRequest: return "METASIGNALLING_INFORMATION_REQUEST";
    case X2MessageKind::MetasignallingInformationAcknowledge:
      return "METASIGNALLING_INFORMATION_ACKNOWLEDGE";
  }
  return "UNKNOWN";
}

/// Informational elements carried by a message. Only the fields relevant to
/// the kind are meaningful.
struct X2Payload {
  double rb_usage_percent = 0.0;
  int spare_rbs = 0;
  int requested_rbs = 0;
  std::vector<int> admitted;
  std::vector<int> rejected;
};

struct X2Message {
  X2MessageKind kind;
  int src = 0;
  int dst = 0;
  X2Payload payload;
};

/// One RENEV negotiation as seen by the message accounting.
struct RequestRound {
  int requester = 0;
  bool polled_macro = false;
  bool succeeded = false;
};

/// Append-only, per-iteration record of the X2 exchanges.
class MessageLog {
 public:
  void append(X2Message m) {
    ++per_kind_[static_cast<std::size_t>(m.kind)];
    ++per_bs_[m.src];
    ++per_bs_[m.dst];
    messages_.push_back(std::move(m));
  }

  void record_round(RequestRound r) { rounds_.push_back(r); }

  const std::vector<X2Message>& messages() const { return messages_; }
  const std::vector<RequestRound>& rounds() const { return rounds_; }
  std::size_t size() const { return messages_.size(); }

  std::uint64_t count(X2MessageKind k) const { return per_kind_[static_cast<std::size_t>(k)]; }

  /// Messages sent or received by `bs`.
  std::uint64_t count_for(int bs) const {
    auto it = per_bs_.find(bs);
    return it == per_bs_.end() ? 0 : it->second;
  }

  const std::map<int, std::uint64_t>& per_station() const { return per_bs_; }

 private:
  std::vector<X2Message> messages_;
  std::vector<RequestRound> rounds_;
  std::array<std::uint64_t, kX2MessageKinds> per_kind_{};
  std::map<int, std::uint64_t> per_bs_;
};

struct MessageCounts {
  std::uint64_t total = 0;
  std::array<std::uint64_t, kX2MessageKinds> per_kind{};
  std::map<int, std::uint64_t> per_station;
  double per_small_cell = 0.0;  // total / N
  // Realised request counts of the iteration.
  std::uint64_t requests = 0;          // n_R
  std::uint64_t macro_polls = 0;       // n'_R
  std::uint64_t successes = 0;         // n_s_total

  /// 3(N-1) n_R + 3 n'_R + 2 n_s_total with the realised counts.
  std::uint64_t formula(int n_small_cells) const {
    return 3ull * static_cast<std::uint64_t>(n_small_cells - 1) * requests + 3ull * macro_polls +
           2ull * successes;
  }
};

inline MessageCounts count_messages(const MessageLog& log, int n_small_cells) {
  MessageCounts c;
  c.total = log.size();
  for (std::size_t k = 0; k < kX2MessageKinds; ++k) c.per_kind[k] = log.count(static_cast<X2MessageKind>(k));
  c.per_station = log.per_station();
  c.per_small_cell = n_small_cells > 0 ? static_cast<double>(c.total) / n_small_cells : 0.0;
  for (const auto& r : log.rounds()) {
    ++c.requests;
    if (r.polled_macro) ++c.macro_polls;
    if (r.succeeded) ++c.successes;
  }
  return c;
}

/// Every acknowledge must answer an earlier request on the reversed link.
inline bool acknowledges_are_paired(const MessageLog& log) {
  std::map<std::pair<int, int>, int> open;
  for (const auto& m : log.messages()) {
    if (m.kind == X2MessageKind::MetasignallingInformationRequest) {
      ++open[{m.src, m.dst}];
    } else if (m.kind == X2MessageKind::MetasignallingInformationAcknowledge) {
      auto& n = open[{m.dst, m.src}];
      if (n == 0) return false;
      --n;
    }
  }
  return true;
}

/// CSV rows `iteration,seq,kind,src,dst` (no header).
inline void write_csv_rows(std::ostream& os, const MessageLog& log, std::uint64_t iteration) {
  std::uint64_t seq = 0;
  for (const auto& m : log.messages())
    os << iteration << ',' << seq++ << ',' << to_string(m.kind) << ',' << m.src << ',' << m.dst << '\n';
}

inline constexpr std::string_view kMessageCsvHeader = "iteration,seq,kind,src,dst\n";

}  // namespace renev
