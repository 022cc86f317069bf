// Reference implementation of the external-model wire protocol, used by the
// adapter tests. Modes:
//   oscillator  full protocol backed by the built-in synthetic model
//   fixed       every SIM returns the same short series; REQ returns 1 value
//   malformed   replies with a line that is not OK/ERR
//   err         replies ERR to everything
//   crash       exits immediately with status 1

#include <cstdio>
#include <cstring>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "uqcal/model.hpp"

namespace {

void print_number(double v) { std::printf(" %.17g", v); }

int run_oscillator() {
    uqcal::SyntheticOscillator model;
    std::string line;
    while (std::getline(std::cin, line)) {
        std::istringstream in(line);
        std::string op;
        in >> op;
        try {
            if (op == "SIM") {
                std::size_t da = 0, de = 0;
                in >> da >> de;
                std::vector<double> a(da), e(de);
                for (auto& v : a) in >> v;
                for (auto& v : e) in >> v;
                if (!in) throw uqcal::invalid_input("short SIM request");
                const uqcal::TimeSeries ts = model.simulate(a, e);
                std::printf("OK %zu %.17g", ts.values.size(), ts.dt);
                for (double v : ts.values) print_number(v);
                std::printf("\n");
            } else if (op == "REQ") {
                std::size_t da = 0, de = 0, dt = 0;
                in >> da >> de >> dt;
                std::vector<double> a(da), e(de), th(dt);
                for (auto& v : a) in >> v;
                for (auto& v : e) in >> v;
                for (auto& v : th) in >> v;
                if (!in) throw uqcal::invalid_input("short REQ request");
                const auto g = model.requirements(a, e, uqcal::DesignPoint{th});
                std::printf("OK %zu", g.size());
                for (double v : g) print_number(v);
                std::printf("\n");
            } else {
                std::printf("ERR unknown op %s\n", op.c_str());
            }
        } catch (const std::exception& ex) {
            std::printf("ERR %s\n", ex.what());
        }
        std::fflush(stdout);
    }
    return 0;
}

int run_fixed() {
    std::string line;
    while (std::getline(std::cin, line)) {
        if (line.rfind("SIM", 0) == 0)
            std::printf("OK 4 0.5 1 2 3 4\n");
        else
            std::printf("OK 1 -0.25\n");
        std::fflush(stdout);
    }
    return 0;
}

int run_mode(const char* mode) {
    if (std::strcmp(mode, "oscillator") == 0) return run_oscillator();
    if (std::strcmp(mode, "fixed") == 0) return run_fixed();
    if (std::strcmp(mode, "crash") == 0) return 1;
    std::string line;
    while (std::getline(std::cin, line)) {
        if (std::strcmp(mode, "err") == 0)
            std::printf("ERR stub refuses to evaluate\n");
        else
            std::printf("BOGUS response line\n");
        std::fflush(stdout);
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    if (argc != 2) {
        std::fprintf(stderr, "usage: external_stub <oscillator|fixed|malformed|err|crash>\n");
        return 2;
    }
    return run_mode(argv[1]);
}
