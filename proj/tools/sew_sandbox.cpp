// Local WebSocket service for the interactive sandbox.

#include <CLI11.hpp>

#include <csignal>
#include <iostream>
#include <optional>

#include "sewmimic/model_io.hpp"
#include "sewmimic/params_io.hpp"
#include "sewmimic/sandbox/server.hpp"

using namespace sewmimic;

namespace {
std::atomic<bool> g_stop{false};
void on_signal(int) { g_stop.store(true); }
}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"SEW retargeting sandbox service (WebSocket on 127.0.0.1)"};
    std::string model_left = std::string(SEWMIMIC_DATA_DIR) + "/models/perpendicular_left.json";
    std::string model_right = std::string(SEWMIMIC_DATA_DIR) + "/models/perpendicular_right.json";
    std::string filter = "on";
    std::string params;
    std::optional<int> port;
    std::string assets;
    app.add_option("--model-left", model_left, "Left arm description")->check(CLI::ExistingFile);
    app.add_option("--model-right", model_right, "Right arm description")->check(CLI::ExistingFile);
    app.add_option("--filter", filter, "Initial safety filter state")->check(CLI::IsMember({"on", "off"}));
    app.add_option("--params", params, "Filter parameter file (JSON)")->check(CLI::ExistingFile);
    app.add_option("--port", port, "TCP port (default: $SEW_SANDBOX_PORT or 8765; 0 picks one)");
    app.add_option("--assets", assets, "Serve static UI files from this directory (dev mode)")
        ->check(CLI::ExistingDirectory);
    CLI11_PARSE(app, argc, argv);

    try {
        const BimanualModel models{load_model(model_left), load_model(model_right)};
        sandbox::SessionOptions opt;
        opt.filter = filter == "on";
        if (!params.empty()) opt.params = load_filter_params(params);

        sandbox::ServerOptions sopt;
        sopt.port = sandbox::resolve_port(port);
        if (!assets.empty()) sopt.assets = assets;
        sandbox::Server server([&] { return sandbox::Session(models, opt); }, sopt);
        const auto bound = server.listen();
        std::cout << "listening on ws://127.0.0.1:" << bound << "/" << (assets.empty() ? "" : " (serving " + assets + ")")
                  << std::endl;

        std::signal(SIGINT, on_signal);
        std::signal(SIGTERM, on_signal);
        server.start();
        while (!g_stop.load()) std::this_thread::sleep_for(std::chrono::milliseconds(100));
        server.stop();
    } catch (const ParseError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
