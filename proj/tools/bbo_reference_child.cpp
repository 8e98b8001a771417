// Reference optimizer child for the newline-delimited protocol: replies
// to every suggest with uniform random points and silently accepts
// observations (sampling is memoryless). The failure modes exist to
// exercise the parent's error paths: "short" answers one suggestion too
// few, "garbage" answers with a non-JSON line, and "slow" sleeps two
// seconds before every reply.

#include <chrono>
#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "bbo/adapter.hpp"
#include "bbo/errors.hpp"
#include "bbo/rng.hpp"
#include "bbo/space.hpp"

namespace {

std::vector<bbo::ParamVector> draw(const bbo::SearchSpace& space, std::size_t n,
                                   bbo::Rng& rng) {
    std::vector<bbo::ParamVector> out;
    out.reserve(n);
    for (const auto& u : bbo::sample_uniform_warped(space, n, rng)) {
        out.push_back(bbo::unwarp(space, u));
    }
    return out;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"reference optimizer child for the bbo line protocol"};
    std::string mode = "ok";
    app.add_option("--mode", mode,
                   "ok | short (one suggestion too few) | garbage (non-JSON reply) | "
                   "slow (2 s delay per reply)")
        ->check(CLI::IsMember({"ok", "short", "garbage", "slow"}));
    CLI11_PARSE(app, argc, argv);

    std::optional<bbo::SearchSpace> space;
    std::optional<bbo::Rng> rng;
    std::string line;
    try {
        while (std::getline(std::cin, line)) {
            switch (bbo::peek_message_type(line)) {
            case bbo::MessageType::Space: {
                auto msg = bbo::decode_space_message(line);
                space = std::move(msg.space);
                rng.emplace(msg.seed);
                break;
            }
            case bbo::MessageType::Suggest: {
                const auto msg = bbo::decode_suggest_message(line);
                if (!space) {
                    throw bbo::ProtocolError("suggest before the space handshake");
                }
                if (mode == "slow") {
                    std::this_thread::sleep_for(std::chrono::seconds(2));
                }
                if (mode == "garbage") {
                    std::cout << "%%% not a protocol line\n" << std::flush;
                    break;
                }
                const std::size_t n = mode == "short" && msg.n > 0 ? msg.n - 1 : msg.n;
                std::cout << bbo::encode_suggestions_message(draw(*space, n, *rng))
                          << '\n'
                          << std::flush;
                break;
            }
            case bbo::MessageType::Observe:
                if (!space) {
                    throw bbo::ProtocolError("observe before the space handshake");
                }
                bbo::decode_observe_message(*space, line);
                break;
            case bbo::MessageType::Stop:
                return 0;
            case bbo::MessageType::Suggestions:
                throw bbo::ProtocolError("a child never receives suggestions");
            }
        }
    } catch (const std::exception& e) {
        std::cerr << "bbo_reference_child: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
