#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <chrono>
#include <cmath>
#include <limits>
#include <memory>
#include <string>
#include <thread>
#include <vector>

#include "bbo/adapter.hpp"
#include "bbo/errors.hpp"
#include "bbo/space.hpp"
#include "conformance.hpp"

using namespace bbo;

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();
constexpr double kInf = std::numeric_limits<double>::infinity();

SearchSpace mixed_space() {
    return SearchSpace({
        ParamSpec::real("lr", 1e-4, 1.0, Scale::Log),
        ParamSpec::integer("depth", 1, 8),
        ParamSpec::categorical("act", {"relu", "tanh", "gelu"}),
        ParamSpec::boolean("bias"),
    });
}

std::vector<std::string> child_command(const std::string& mode) {
    return {BBO_REFERENCE_CHILD, "--mode", mode};
}

} // namespace

TEST_CASE("peek_message_type reads the type tag and rejects everything else") {
    CHECK(peek_message_type(R"({"type":"space","specs":[],"seed":0})") ==
          MessageType::Space);
    CHECK(peek_message_type(R"({"type":"suggest","n":3})") == MessageType::Suggest);
    CHECK(peek_message_type(R"({"type":"suggestions","params":[]})") ==
          MessageType::Suggestions);
    CHECK(peek_message_type(R"({"type":"observe","params":[],"scores":[]})") ==
          MessageType::Observe);
    CHECK(peek_message_type(R"({"type":"stop"})") == MessageType::Stop);

    CHECK_THROWS_AS(peek_message_type("%%% not json"), ProtocolError);
    CHECK_THROWS_AS(peek_message_type("[1,2,3]"), ProtocolError);
    CHECK_THROWS_AS(peek_message_type(R"({"n":3})"), ProtocolError);
    CHECK_THROWS_AS(peek_message_type(R"({"type":"dance"})"), ProtocolError);

    // The error quotes the offending bytes so a broken child is debuggable
    // from the exception alone.
    try {
        peek_message_type("%%% not json");
        FAIL("expected ProtocolError");
    } catch (const ProtocolError& e) {
        CHECK(std::string(e.what()).find("%%% not json") != std::string::npos);
    }
}

TEST_CASE("space messages carry the space and seed intact") {
    const SearchSpace space = mixed_space();
    const SpaceMessage msg = decode_space_message(encode_space_message(space, 99));
    CHECK(msg.space == space);
    CHECK(msg.seed == 99);

    CHECK_THROWS_AS(decode_space_message(R"({"type":"space","specs":5,"seed":0})"),
                    ProtocolError);
    CHECK_THROWS_AS(decode_space_message(R"({"type":"space","seed":0})"), ProtocolError);
    CHECK_THROWS_AS(decode_space_message(R"({"type":"stop"})"), ProtocolError);
}

TEST_CASE("suggest messages round-trip the batch size") {
    CHECK(decode_suggest_message(encode_suggest_message(4)).n == 4);
    CHECK(decode_suggest_message(encode_suggest_message(0)).n == 0);
    CHECK_THROWS_AS(decode_suggest_message(R"({"type":"suggest"})"), ProtocolError);
    CHECK_THROWS_AS(decode_suggest_message(R"({"type":"suggest","n":-2})"),
                    ProtocolError);
    CHECK_THROWS_AS(decode_suggest_message(R"({"type":"suggest","n":"many"})"),
                    ProtocolError);
}

TEST_CASE("suggestions messages validate every decoded point") {
    const SearchSpace space = mixed_space();
    const auto points = sample_uniform(space, 3, 7);
    const SuggestionsMessage msg =
        decode_suggestions_message(space, encode_suggestions_message(points));
    REQUIRE(msg.params.size() == 3);
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(msg.params[i] == points[i]);
    }

    CHECK(decode_suggestions_message(space, encode_suggestions_message({}))
              .params.empty());
    // Out-of-domain values fail space validation rather than sneaking in.
    CHECK_THROWS_AS(
        decode_suggestions_message(
            SearchSpace({ParamSpec::real("x", 0.0, 1.0)}),
            R"({"type":"suggestions","params":[{"x":99.0}]})"),
        DomainError);
    CHECK_THROWS_AS(decode_suggestions_message(space, R"({"type":"suggestions"})"),
                    ProtocolError);
}

TEST_CASE("observe messages carry non-finite scores as strings") {
    const SearchSpace space = mixed_space();
    const auto points = sample_uniform(space, 3, 8);
    const std::string line = encode_observe_message(points, {kNan, kInf, -1.5});
    CHECK(line.find("\"nan\"") != std::string::npos);
    CHECK(line.find("\"inf\"") != std::string::npos);

    const ObserveMessage msg = decode_observe_message(space, line);
    REQUIRE(msg.params.size() == 3);
    REQUIRE(msg.scores.size() == 3);
    CHECK(msg.params[1] == points[1]);
    CHECK(std::isnan(msg.scores[0]));
    CHECK(msg.scores[1] == kInf);
    CHECK(msg.scores[2] == -1.5);

    CHECK_THROWS_AS(encode_observe_message(points, {1.0}), ShapeError);
    CHECK_THROWS_AS(
        decode_observe_message(
            space, R"({"type":"observe","params":[],"scores":["nan"]})"),
        ProtocolError);
}

TEST_CASE("a child that echoes lines satisfies write_line and read_line") {
    ChildProcess cat({"cat"});
    cat.write_line(R"({"type":"stop"})");
    CHECK(cat.read_line(5.0) == R"({"type":"stop"})");
    cat.write_line("two");
    cat.write_line("lines");
    CHECK(cat.read_line(5.0) == "two");
    CHECK(cat.read_line(5.0) == "lines");
    cat.shutdown();
}

TEST_CASE("a silent child runs out the read deadline") {
    ChildProcess sleeper({"sleep", "30"});
    const auto t0 = std::chrono::steady_clock::now();
    CHECK_THROWS_AS(sleeper.read_line(0.2), TimeoutError);
    const double waited =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    CHECK(waited >= 0.2);
    CHECK(waited < 5.0);
    sleeper.shutdown();
}

TEST_CASE("a child that exits early surfaces as protocol errors, not signals") {
    ChildProcess dead({"true"});
    CHECK_THROWS_AS(dead.read_line(5.0), ProtocolError);
    // Writing into the dead child's pipe must raise, not kill the parent
    // with SIGPIPE.
    std::this_thread::sleep_for(std::chrono::milliseconds(50));
    CHECK_THROWS_AS(
        [&] {
            for (int i = 0; i < 4096; ++i) {
                dead.write_line("anyone home?");
            }
        }(),
        ProtocolError);
    dead.shutdown();
}

TEST_CASE("the reference child passes optimizer conformance over the protocol") {
    const SearchSpace space = mixed_space();
    testconf::run_conformance(space, [&](std::uint64_t seed) {
        return std::make_unique<AdapterOptimizer>(space, seed, child_command("ok"));
    });
}

TEST_CASE("adapter names include the child command") {
    const SearchSpace space = mixed_space();
    AdapterOptimizer opt(space, 1, child_command("ok"));
    CHECK(opt.name().rfind("adapter:", 0) == 0);
    CHECK(opt.name().find("bbo_reference_child") != std::string::npos);
}

TEST_CASE("a short reply is a contract violation") {
    const SearchSpace space = mixed_space();
    AdapterOptimizer opt(space, 1, child_command("short"));
    CHECK_THROWS_AS(opt.suggest(4), ContractViolation);
}

TEST_CASE("a malformed reply is a protocol error naming the bytes") {
    const SearchSpace space = mixed_space();
    AdapterOptimizer opt(space, 1, child_command("garbage"));
    try {
        opt.suggest(4);
        FAIL("expected ProtocolError");
    } catch (const ProtocolError& e) {
        CHECK(std::string(e.what()).find("%%%") != std::string::npos);
    }
}

TEST_CASE("a slow reply runs out the per-iteration deadline") {
    const SearchSpace space = mixed_space();
    AdapterOptimizer opt(space, 1, child_command("slow"), 0.3);
    CHECK_THROWS_AS(opt.suggest(4), TimeoutError);
}

TEST_CASE("a vanished child is a protocol error on the next exchange") {
    const SearchSpace space = mixed_space();
    AdapterOptimizer opt(space, 1, {"true"});
    CHECK_THROWS_AS(opt.suggest(2), ProtocolError);
}

TEST_CASE("adapter construction rejects a non-positive timeout") {
    const SearchSpace space = mixed_space();
    CHECK_THROWS_AS(AdapterOptimizer(space, 1, child_command("ok"), 0.0), ConfigError);
    CHECK_THROWS_AS(AdapterOptimizer(space, 1, child_command("ok"), -1.0), ConfigError);
}
