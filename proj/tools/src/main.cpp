#include <cstdio>
#include <cstring>
#include <string>
#include <vector>

#include "chanchart/errors.hpp"
#include "commands.hpp"
#include "run_config.hpp"

namespace {

void print_usage() {
    std::printf(
        "usage: chanchart <command> [--config FILE] [--key value ...] [run-configs...]\n"
        "\n"
        "commands:\n"
        "  generate   synthesize a street-grid walk CSI dataset (CCD1)\n"
        "  featurize  export CSI features as CSV\n"
        "  train      extract features, select triplets, train a chart model\n"
        "  evaluate   embed a dataset with a checkpoint; emit chart CSV/SVG and metrics\n"
        "  compare    train+evaluate several run configs on one shared dataset\n"
        "\n"
        "Options are flat key=value settings; --key value on the command line and\n"
        "key = value lines in --config files are interchangeable (dashes and\n"
        "underscores in keys too).  Arguments are applied left to right.  compare\n"
        "takes two or more positional run-config files applied on top of the base\n"
        "config, sharing its dataset and seed.\n"
        "\n"
        "keys:\n%s"
        "\nexit codes: 0 success, 1 config/validation error, 2 numeric failure\n",
        chanchart::cli::keys_help().c_str());
}

} // namespace

int main(int argc, char** argv) {
    using namespace chanchart;
    using namespace chanchart::cli;

    if (argc < 2) {
        print_usage();
        return 1;
    }
    const std::string command = argv[1];
    if (command == "--help" || command == "-h" || command == "help") {
        print_usage();
        return 0;
    }

    try {
        RunConfig cfg;
        std::vector<std::string> positional;
        for (int i = 2; i < argc; ++i) {
            const std::string arg = argv[i];
            if (arg == "--help" || arg == "-h") {
                print_usage();
                return 0;
            }
            if (arg.rfind("--", 0) == 0) {
                if (i + 1 >= argc) throw ConfigError("missing value after " + arg);
                const std::string value = argv[++i];
                if (arg == "--config")
                    apply_file(cfg, value);
                else
                    apply_key(cfg, arg.substr(2), value);
            } else {
                positional.push_back(arg);
            }
        }

        if (command == "generate" || command == "featurize" || command == "train" ||
            command == "evaluate") {
            if (!positional.empty())
                throw ConfigError("unexpected positional argument: " + positional.front());
            if (command == "generate") return cmd_generate(cfg);
            if (command == "featurize") return cmd_featurize(cfg);
            if (command == "train") return cmd_train(cfg);
            return cmd_evaluate(cfg);
        }
        if (command == "compare") return cmd_compare(cfg, positional);

        std::fprintf(stderr, "error: unknown command '%s' (try --help)\n", command.c_str());
        return 1;
    } catch (const NumericError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
}
