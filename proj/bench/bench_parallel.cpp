// Serial reference vs OpenMP kernels: session batches and the blinding grid search.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <vector>

#include <omp.h>

#include "ddiqkd/blinding.hpp"
#include "ddiqkd/sweep.hpp"

using namespace ddiqkd;
using bench_clock = std::chrono::steady_clock;

template <class F>
double seconds(F&& f) {
    const auto t0 = bench_clock::now();
    f();
    return std::chrono::duration<double>(bench_clock::now() - t0).count();
}

int main(int argc, char** argv) {
    const std::size_t sessions = argc > 1 ? std::strtoul(argv[1], nullptr, 10) : 64;
    std::printf("threads: %d\n", omp_get_max_threads());

    SessionConfig base;
    base.n_slots = 100000;
    base.mode = Mode::Covert;
    base.channel.transmittance = 0.1;
    const auto configs = seeded_copies(base, 1, sessions);

    std::vector<BatchEntry> serial;
    std::vector<BatchEntry> parallel;
    const double t_serial = seconds([&] { serial = run_batch_serial(configs); });
    const double t_parallel = seconds([&] { parallel = run_batch(configs); });
    bool same = serial.size() == parallel.size();
    for (std::size_t i = 0; same && i < serial.size(); ++i) {
        same = serial[i].report->reported == parallel[i].report->reported;
    }
    std::printf("sessions x%zu  serial %.3fs  parallel %.3fs  speedup %.2f  identical %s\n", sessions, t_serial,
                t_parallel, t_serial / t_parallel, same ? "yes" : "NO");

    DetectorArray det = uniform_detectors(0.2);
    std::vector<double> wl;
    std::vector<double> powers;
    for (int i = 0; i < 200; ++i) wl.push_back(1200.0 + i);
    for (int i = 1; i <= 400; ++i) powers.push_back(0.01 * i);
    for (auto& d : det) {
        std::map<double, double> th;
        for (double w : wl) th[w] = 0.8 + 0.4 * ((static_cast<int>(w) * 7 + static_cast<int>(d.id) * 13) % 11) / 10.0;
        d.blind_threshold = WavelengthTable(th);
    }
    BlindingPlan a;
    BlindingPlan b;
    const double o_serial = seconds([&] { a = optimize_pulse_serial(det, wl, powers); });
    const double o_parallel = seconds([&] { b = optimize_pulse(det, wl, powers); });
    std::printf("optimizer %zux%zu  serial %.3fs  parallel %.3fs  speedup %.2f  identical %s\n", wl.size(),
                powers.size(), o_serial, o_parallel, o_serial / o_parallel, a == b ? "yes" : "NO");
    return same && a == b ? 0 : 1;
}
