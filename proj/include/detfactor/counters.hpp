#pragma once

#include <atomic>
#include <cstdint>

namespace detfactor {

// Plain snapshot of the instrumentation counters, safe to copy around.
struct CounterSnapshot {
    std::uint64_t ring_mults = 0;
    std::uint64_t poly_mults = 0;
    std::uint64_t max_poly_degree = 0;
    std::uint64_t gcd_calls = 0;
    std::uint64_t shift_eval_calls = 0;
};

// Monotonic operation tallies, shared by every context of one run.
//
// What each field counts:
//   ring_mults       modular multiplications (mul only; add/sub/neg are free)
//   poly_mults       polynomial multiplications, whichever internal path ran
//   max_poly_degree  largest operand degree seen by a polynomial multiply
//   gcd_calls        gcd / modular-inversion attempts against the modulus
//   shift_eval_calls shifted-evaluation invocations
//
// Increments use relaxed atomics: totals are exact regardless of thread
// interleaving, which keeps seeded runs bit-for-bit reproducible.
class OpCounters {
public:
    void add_ring_mults(std::uint64_t n = 1) { ring_mults_.fetch_add(n, std::memory_order_relaxed); }
    void add_poly_mult() { poly_mults_.fetch_add(1, std::memory_order_relaxed); }
    void add_gcd_calls(std::uint64_t n = 1) { gcd_calls_.fetch_add(n, std::memory_order_relaxed); }
    void add_shift_eval() { shift_eval_calls_.fetch_add(1, std::memory_order_relaxed); }

    void note_poly_degree(std::uint64_t deg) {
        std::uint64_t cur = max_poly_degree_.load(std::memory_order_relaxed);
        while (cur < deg && !max_poly_degree_.compare_exchange_weak(cur, deg, std::memory_order_relaxed)) {
        }
    }

    CounterSnapshot snapshot() const {
        CounterSnapshot s;
        s.ring_mults = ring_mults_.load(std::memory_order_relaxed);
        s.poly_mults = poly_mults_.load(std::memory_order_relaxed);
        s.max_poly_degree = max_poly_degree_.load(std::memory_order_relaxed);
        s.gcd_calls = gcd_calls_.load(std::memory_order_relaxed);
        s.shift_eval_calls = shift_eval_calls_.load(std::memory_order_relaxed);
        return s;
    }

    void reset() {
        ring_mults_.store(0, std::memory_order_relaxed);
        poly_mults_.store(0, std::memory_order_relaxed);
        max_poly_degree_.store(0, std::memory_order_relaxed);
        gcd_calls_.store(0, std::memory_order_relaxed);
        shift_eval_calls_.store(0, std::memory_order_relaxed);
    }

private:
    std::atomic<std::uint64_t> ring_mults_{0};
    std::atomic<std::uint64_t> poly_mults_{0};
    std::atomic<std::uint64_t> max_poly_degree_{0};
    std::atomic<std::uint64_t> gcd_calls_{0};
    std::atomic<std::uint64_t> shift_eval_calls_{0};
};

} // namespace detfactor
