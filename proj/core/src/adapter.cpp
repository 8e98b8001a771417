#include "bbo/adapter.hpp"

#include <cerrno>
#include <chrono>
#include <cmath>
#include <csignal>
#include <cstring>
#include <string>
#include <thread>
#include <utility>

#include <poll.h>
#include <sys/wait.h>
#include <unistd.h>

#include <nlohmann/json.hpp>

#include "bbo/errors.hpp"
#include "json_detail.hpp"

namespace bbo {

namespace {

using nlohmann::json;
using Clock = std::chrono::steady_clock;

std::string clip_bytes(const std::string& line) {
    constexpr std::size_t kMax = 120;
    if (line.size() <= kMax) {
        return line;
    }
    return line.substr(0, kMax) + "...";
}

json parse_line(const std::string& line) {
    try {
        return json::parse(line);
    } catch (const json::exception& e) {
        throw ProtocolError(std::string("malformed protocol line (") + e.what() +
                            "): \"" + clip_bytes(line) + "\"");
    }
}

json require_type(const std::string& line, const char* want) {
    json j = parse_line(line);
    if (!j.is_object() || !j.contains("type") || !j.at("type").is_string()) {
        throw ProtocolError("protocol line has no \"type\": \"" + clip_bytes(line) + "\"");
    }
    const std::string type = j.at("type").get<std::string>();
    if (type != want) {
        throw ProtocolError(std::string("expected a \"") + want + "\" message, got \"" +
                            type + "\"");
    }
    return j;
}

std::vector<ParamVector> params_array_from(const SearchSpace& space, const json& j,
                                           const char* what) {
    if (!j.is_array()) {
        throw ProtocolError(std::string(what) + " message needs a \"params\" array");
    }
    std::vector<ParamVector> out;
    out.reserve(j.size());
    for (const auto& entry : j) {
        out.push_back(params_from_json(space, entry.dump()));
    }
    return out;
}

} // namespace

MessageType peek_message_type(const std::string& line) {
    json j = parse_line(line);
    if (!j.is_object() || !j.contains("type") || !j.at("type").is_string()) {
        throw ProtocolError("protocol line has no \"type\": \"" + clip_bytes(line) + "\"");
    }
    const std::string type = j.at("type").get<std::string>();
    if (type == "space") {
        return MessageType::Space;
    }
    if (type == "suggest") {
        return MessageType::Suggest;
    }
    if (type == "suggestions") {
        return MessageType::Suggestions;
    }
    if (type == "observe") {
        return MessageType::Observe;
    }
    if (type == "stop") {
        return MessageType::Stop;
    }
    throw ProtocolError("unknown message type \"" + type + "\"");
}

std::string encode_space_message(const SearchSpace& space, std::uint64_t seed) {
    json j;
    j["type"] = "space";
    j["specs"] = json::parse(space_to_json(space)).at("params");
    j["seed"] = seed;
    return j.dump();
}

std::string encode_suggest_message(std::size_t n) {
    json j;
    j["type"] = "suggest";
    j["n"] = n;
    return j.dump();
}

std::string encode_suggestions_message(const std::vector<ParamVector>& params) {
    json j;
    j["type"] = "suggestions";
    j["params"] = json::array();
    for (const auto& p : params) {
        j["params"].push_back(json::parse(params_to_json(p)));
    }
    return j.dump();
}

std::string encode_observe_message(const std::vector<ParamVector>& params,
                                   const std::vector<double>& scores) {
    if (params.size() != scores.size()) {
        throw ShapeError("observe message: " + std::to_string(params.size()) +
                         " params vs " + std::to_string(scores.size()) + " scores");
    }
    json j;
    j["type"] = "observe";
    j["params"] = json::array();
    for (const auto& p : params) {
        j["params"].push_back(json::parse(params_to_json(p)));
    }
    j["scores"] = detail::num_array_to_json(scores);
    return j.dump();
}

std::string encode_stop_message() {
    json j;
    j["type"] = "stop";
    return j.dump();
}

SpaceMessage decode_space_message(const std::string& line) {
    const json j = require_type(line, "space");
    if (!j.contains("specs") || !j.at("specs").is_array() || !j.contains("seed") ||
        !j.at("seed").is_number_unsigned()) {
        throw ProtocolError("space message needs a \"specs\" array and an unsigned "
                            "\"seed\"");
    }
    json space_doc;
    space_doc["params"] = j.at("specs");
    SpaceMessage msg;
    try {
        msg.space = space_from_json(space_doc.dump());
    } catch (const ConfigError& e) {
        throw ProtocolError(std::string("space message carries a bad spec: ") + e.what());
    }
    msg.seed = j.at("seed").get<std::uint64_t>();
    return msg;
}

SuggestMessage decode_suggest_message(const std::string& line) {
    const json j = require_type(line, "suggest");
    if (!j.contains("n") || !j.at("n").is_number_unsigned()) {
        throw ProtocolError("suggest message needs an unsigned \"n\"");
    }
    return SuggestMessage{j.at("n").get<std::size_t>()};
}

SuggestionsMessage decode_suggestions_message(const SearchSpace& space,
                                              const std::string& line) {
    const json j = require_type(line, "suggestions");
    if (!j.contains("params")) {
        throw ProtocolError("suggestions message needs a \"params\" array");
    }
    SuggestionsMessage msg;
    msg.params = params_array_from(space, j.at("params"), "suggestions");
    return msg;
}

ObserveMessage decode_observe_message(const SearchSpace& space, const std::string& line) {
    const json j = require_type(line, "observe");
    if (!j.contains("params") || !j.contains("scores")) {
        throw ProtocolError("observe message needs \"params\" and \"scores\" arrays");
    }
    ObserveMessage msg;
    msg.params = params_array_from(space, j.at("params"), "observe");
    msg.scores = detail::num_array_from_json<ProtocolError>(j.at("scores"),
                                                            "observe scores");
    if (msg.params.size() != msg.scores.size()) {
        throw ProtocolError("observe message: " + std::to_string(msg.params.size()) +
                            " params vs " + std::to_string(msg.scores.size()) +
                            " scores");
    }
    return msg;
}

ChildProcess::ChildProcess(const std::vector<std::string>& argv) {
    if (argv.empty()) {
        throw ConfigError("child command is empty");
    }
    int to_child[2];
    int from_child[2];
    if (::pipe(to_child) != 0) {
        throw StateError(std::string("pipe failed: ") + std::strerror(errno));
    }
    if (::pipe(from_child) != 0) {
        const int err = errno;
        ::close(to_child[0]);
        ::close(to_child[1]);
        throw StateError(std::string("pipe failed: ") + std::strerror(err));
    }
    pid_ = ::fork();
    if (pid_ < 0) {
        const int err = errno;
        ::close(to_child[0]);
        ::close(to_child[1]);
        ::close(from_child[0]);
        ::close(from_child[1]);
        throw StateError(std::string("fork failed: ") + std::strerror(err));
    }
    if (pid_ == 0) {
        ::dup2(to_child[0], STDIN_FILENO);
        ::dup2(from_child[1], STDOUT_FILENO);
        ::close(to_child[0]);
        ::close(to_child[1]);
        ::close(from_child[0]);
        ::close(from_child[1]);
        std::vector<char*> cargv;
        cargv.reserve(argv.size() + 1);
        for (const auto& arg : argv) {
            cargv.push_back(const_cast<char*>(arg.c_str()));
        }
        cargv.push_back(nullptr);
        ::execvp(cargv[0], cargv.data());
        // The parent sees this as the pipes closing before any reply.
        _exit(127);
    }
    ::close(to_child[0]);
    ::close(from_child[1]);
    to_child_ = to_child[1];
    from_child_ = from_child[0];
}

ChildProcess::~ChildProcess() { shutdown(); }

void ChildProcess::write_line(const std::string& line) {
    if (to_child_ < 0) {
        throw StateError("child stdin is already closed");
    }
    std::string msg = line;
    msg += '\n';

    // Block SIGPIPE for the duration so a dead child surfaces as EPIPE
    // instead of killing the process; any pending signal is drained
    // before the mask is restored.
    sigset_t pipe_set;
    sigset_t old_set;
    sigemptyset(&pipe_set);
    sigaddset(&pipe_set, SIGPIPE);
    pthread_sigmask(SIG_BLOCK, &pipe_set, &old_set);

    int write_errno = 0;
    std::size_t off = 0;
    while (off < msg.size()) {
        const ssize_t n = ::write(to_child_, msg.data() + off, msg.size() - off);
        if (n < 0) {
            if (errno == EINTR) {
                continue;
            }
            write_errno = errno;
            break;
        }
        off += std::size_t(n);
    }
    if (write_errno != 0) {
        struct timespec zero = {0, 0};
        sigtimedwait(&pipe_set, nullptr, &zero);
    }
    pthread_sigmask(SIG_SETMASK, &old_set, nullptr);

    if (write_errno != 0) {
        throw ProtocolError(std::string("child closed its input: ") +
                            std::strerror(write_errno));
    }
}

std::string ChildProcess::read_line(double timeout_seconds) {
    const auto deadline = Clock::now() + std::chrono::duration<double>(timeout_seconds);
    for (;;) {
        const auto nl = buffer_.find('\n');
        if (nl != std::string::npos) {
            std::string line = buffer_.substr(0, nl);
            buffer_.erase(0, nl + 1);
            return line;
        }
        if (from_child_ < 0) {
            throw ProtocolError("child stdout is already closed");
        }
        const double remain =
            std::chrono::duration<double>(deadline - Clock::now()).count();
        if (remain <= 0.0) {
            throw TimeoutError("no reply from child within " +
                               std::to_string(timeout_seconds) + " s");
        }
        struct pollfd pfd = {from_child_, POLLIN, 0};
        const int wait_ms =
            remain >= 60.0 ? 60000 : int(std::ceil(remain * 1000.0));
        const int ready = ::poll(&pfd, 1, wait_ms);
        if (ready < 0) {
            if (errno == EINTR) {
                continue;
            }
            throw StateError(std::string("poll failed: ") + std::strerror(errno));
        }
        if (ready == 0) {
            continue; // deadline recheck at the top
        }
        char chunk[4096];
        const ssize_t n = ::read(from_child_, chunk, sizeof chunk);
        if (n < 0) {
            if (errno == EINTR) {
                continue;
            }
            throw StateError(std::string("read failed: ") + std::strerror(errno));
        }
        if (n == 0) {
            throw ProtocolError("child closed its output before replying");
        }
        buffer_.append(chunk, std::size_t(n));
    }
}

void ChildProcess::shutdown() {
    if (to_child_ >= 0) {
        ::close(to_child_);
        to_child_ = -1;
    }
    if (pid_ > 0) {
        bool reaped = false;
        for (int i = 0; i < 50 && !reaped; ++i) {
            int status = 0;
            if (::waitpid(pid_, &status, WNOHANG) == pid_) {
                reaped = true;
                break;
            }
            std::this_thread::sleep_for(std::chrono::milliseconds(10));
        }
        if (!reaped) {
            ::kill(pid_, SIGKILL);
            ::waitpid(pid_, nullptr, 0);
        }
        pid_ = -1;
    }
    if (from_child_ >= 0) {
        ::close(from_child_);
        from_child_ = -1;
    }
}

AdapterOptimizer::AdapterOptimizer(const SearchSpace& space, std::uint64_t seed,
                                   const std::vector<std::string>& command,
                                   double reply_timeout_seconds)
    : Optimizer(command.empty() ? "adapter" : "adapter:" + command.front(), space),
      child_(command),
      timeout_(reply_timeout_seconds) {
    if (!(reply_timeout_seconds > 0.0)) {
        throw ConfigError("adapter: reply timeout must be positive");
    }
    child_.write_line(encode_space_message(space, seed));
}

AdapterOptimizer::~AdapterOptimizer() {
    try {
        child_.write_line(encode_stop_message());
    } catch (...) {
        // A vanished child is already as stopped as it gets.
    }
    child_.shutdown();
}

std::vector<ParamVector> AdapterOptimizer::suggest(std::size_t n) {
    child_.write_line(encode_suggest_message(n));
    SuggestionsMessage msg =
        decode_suggestions_message(space(), child_.read_line(timeout_));
    if (msg.params.size() != n) {
        throw ContractViolation("adapter child returned " +
                                std::to_string(msg.params.size()) +
                                " suggestions, wanted " + std::to_string(n));
    }
    return std::move(msg.params);
}

void AdapterOptimizer::on_observe(const std::vector<ParamVector>& params,
                                  const std::vector<double>& scores) {
    child_.write_line(encode_observe_message(params, scores));
}

} // namespace bbo
