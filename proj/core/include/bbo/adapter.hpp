#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "bbo/optimizer.hpp"
#include "bbo/space.hpp"

namespace bbo {

// Newline-delimited JSON protocol between the harness and an external
// optimizer process, one object per line:
//
//   parent -> child   {"type":"space","specs":[...],"seed":S}
//   parent -> child   {"type":"suggest","n":N}
//   child  -> parent  {"type":"suggestions","params":[{...},...]}
//   parent -> child   {"type":"observe","params":[...],"scores":[...]}
//   parent -> child   {"type":"stop"}
//
// Scores may be non-finite; they ride as the strings "nan", "inf", and
// "-inf". Params use the same flat objects as params_to_json.

enum class MessageType { Space, Suggest, Suggestions, Observe, Stop };

/// Throws ProtocolError, quoting the offending bytes, when the line is
/// not a JSON object with a known "type".
MessageType peek_message_type(const std::string& line);

std::string encode_space_message(const SearchSpace& space, std::uint64_t seed);
std::string encode_suggest_message(std::size_t n);
std::string encode_suggestions_message(const std::vector<ParamVector>& params);
std::string encode_observe_message(const std::vector<ParamVector>& params,
                                   const std::vector<double>& scores);
std::string encode_stop_message();

struct SpaceMessage {
    SearchSpace space;
    std::uint64_t seed = 0;
};
struct SuggestMessage {
    std::size_t n = 0;
};
struct SuggestionsMessage {
    std::vector<ParamVector> params;
};
struct ObserveMessage {
    std::vector<ParamVector> params;
    std::vector<double> scores;
};

// Decoders throw ProtocolError on the wrong type or a malformed body;
// params are validated against the space (DomainError passes through).
SpaceMessage decode_space_message(const std::string& line);
SuggestMessage decode_suggest_message(const std::string& line);
SuggestionsMessage decode_suggestions_message(const SearchSpace& space,
                                              const std::string& line);
ObserveMessage decode_observe_message(const SearchSpace& space, const std::string& line);

/// A child process with line-oriented pipes on its stdin and stdout.
/// Reads poll with a deadline; a child that stays silent past it earns a
/// TimeoutError, and one that closes its pipes a ProtocolError.
class ChildProcess {
public:
    explicit ChildProcess(const std::vector<std::string>& argv);
    ~ChildProcess();

    ChildProcess(const ChildProcess&) = delete;
    ChildProcess& operator=(const ChildProcess&) = delete;

    void write_line(const std::string& line);
    std::string read_line(double timeout_seconds);

    /// Closes the child's stdin and reaps it, escalating to SIGKILL after
    /// a short grace period. Safe to call twice.
    void shutdown();

private:
    int pid_ = -1;
    int to_child_ = -1;
    int from_child_ = -1;
    std::string buffer_;
};

/// Runs an external optimizer behind the standard Optimizer interface:
/// launches the command, sends the space handshake, forwards suggest and
/// observe over the protocol. Each suggest waits at most
/// reply_timeout_seconds for the child's batch, matching the
/// per-iteration budget. A reply with the wrong count is a
/// ContractViolation; out-of-domain replies fail space validation.
class AdapterOptimizer : public Optimizer {
public:
    AdapterOptimizer(const SearchSpace& space, std::uint64_t seed,
                     const std::vector<std::string>& command,
                     double reply_timeout_seconds = 40.0);
    ~AdapterOptimizer() override;

    std::vector<ParamVector> suggest(std::size_t n) override;

protected:
    void on_observe(const std::vector<ParamVector>& params,
                    const std::vector<double>& scores) override;

private:
    ChildProcess child_;
    double timeout_;
};

} // namespace bbo
