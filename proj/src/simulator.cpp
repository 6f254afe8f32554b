#include "mtfee/simulator.hpp"

#include "mtfee/errors.hpp"
#include "mtfee/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace mtfee {

ThinningBounds thinning_bounds(const ContractPolicy& policy, int lattice_nodes, double margin) {
    const auto& vp = policy.params();
    const auto& p = vp.model();
    const int qb = p.q_bar;
    const std::size_t w = 2 * static_cast<std::size_t>(qb) + 1;
    std::vector<double> min_ask(w, std::numeric_limits<double>::infinity()), min_bid(min_ask);
    if (policy.kind() == PolicyKind::constant) {
        // Time-independent quotes; q = 0 has both sides open since q̄ ≥ 1.
        const Quote z = policy.at(0.0, 0);
        std::fill(min_ask.begin() + 1, min_ask.end(), *z.ask);
        std::fill(min_bid.begin(), min_bid.end() - 1, *z.bid);
    } else {
        for (double t : uniform_grid(p.T, std::max(lattice_nodes, 2))) {
            for (int q = -qb; q <= qb; ++q) {
                const Quote z = policy.at(t, q);
                const std::size_t i = static_cast<std::size_t>(q + qb);
                if (z.ask) min_ask[i] = std::min(min_ask[i], *z.ask);
                if (z.bid) min_bid[i] = std::min(min_bid[i], *z.bid);
            }
        }
    }
    const double global = intensity_unbounded(-p.delta_inf, p);
    auto bound = [&](double d) {
        if (!std::isfinite(d)) return 0.0;
        const double local = intensity_unbounded(std::max(d - margin, -p.delta_inf), p);
        return std::isfinite(global) ? std::min(local, global) : local;
    };
    ThinningBounds b;
    b.ask.resize(w);
    b.bid.resize(w);
    for (std::size_t i = 0; i < w; ++i) {
        b.ask[i] = bound(min_ask[i]);
        b.bid[i] = bound(min_bid[i]);
        if (!std::isfinite(b.ask[i]) || !std::isfinite(b.bid[i]))
            throw NumericalError("dominating intensity overflows; delta_inf or spreads too extreme");
    }
    return b;
}

namespace {

void check_output_times(const std::vector<double>& times, double T) {
    if (times.empty()) throw ValidationError("empty output grid");
    for (std::size_t i = 0; i < times.size(); ++i) {
        if (times[i] < 0.0 || times[i] > T) throw ValidationError("output time outside [0, T]");
        if (i > 0 && !(times[i] > times[i - 1])) throw ValidationError("output times must be increasing");
    }
}

}  // namespace

PathRecord simulate_path(const ContractPolicy& policy, const ThinningBounds& bounds, std::uint64_t master_seed,
                         std::uint64_t path_index, const std::vector<double>& output_times,
                         const SimulationOptions& opt) {
    const auto& vp = policy.params();
    const auto& p = vp.model();
    const int qb = p.q_bar;
    check_output_times(output_times, p.T);
    if (opt.q0 < -qb || opt.q0 > qb) throw ValidationError("q0 outside [-q_bar, q_bar]");
    if (opt.accrual_substeps < 2 || opt.accrual_substeps % 2 != 0)
        throw ValidationError("accrual_substeps must be a positive even number");
    if (bounds.ask.size() != 2 * static_cast<std::size_t>(qb) + 1) throw ValidationError("thinning table size mismatch");

    Rng rng(master_seed, path_index);
    PathRecord rec;
    rec.seed = master_seed;
    rec.path_index = path_index;
    rec.regime = policy.kind();
    rec.times = output_times;
    const std::size_t m = output_times.size();
    for (auto* v : {&rec.S, &rec.X, &rec.PL, &rec.Y, &rec.exchange_pnl, &rec.trading_cost, &rec.spread}) v->resize(m);
    rec.Na.resize(m);
    rec.Nb.resize(m);
    rec.Q.resize(m);

    const bool contract = policy.has_contract();
    int q = opt.q0;
    double t = 0.0;
    double s = opt.s0;
    double x = 0.0;
    double y = contract ? policy.y0() : 0.0;
    long na = 0, nb = 0;
    double seg_t = 0.0;  // time of the last price sample / accrual point

    auto drift_at = [&](double tt) { return accrual_drift(policy.at(tt, q), q, vp); };

    // Sample S at `to`, accrue Y over [seg_t, to] with the current inventory.
    auto advance = [&](double to) {
        const double dt = to - seg_t;
        if (dt <= 0.0) return;
        const double ds = opt.freeze_price ? 0.0 : p.sigma * std::sqrt(dt) * rng.normal();
        if (contract) {
            const Quote z = policy.at(seg_t, q);
            const int n = opt.accrual_substeps;
            const double h = dt / n;
            double integral = 0.0;
            for (int i = 0; i <= n; ++i) {
                const double w = (i == 0 || i == n) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
                integral += w * drift_at(seg_t + i * h);
            }
            y += z.zs * ds + integral * h / 3.0;
        }
        rec.int_q_ds += q * ds;
        s += ds;
        seg_t = to;
    };

    auto record = [&](std::size_t j) {
        rec.S[j] = s;
        rec.X[j] = x;
        rec.PL[j] = x + q * s;
        rec.Y[j] = y;
        rec.exchange_pnl[j] = p.c * static_cast<double>(na + nb) - y;
        rec.trading_cost[j] = rec.ask_income;
        rec.Na[j] = na;
        rec.Nb[j] = nb;
        rec.Q[j] = q;
        const Quote z = policy.at(output_times[j], q);
        rec.spread[j] = (z.ask && z.bid) ? *z.ask + *z.bid : std::numeric_limits<double>::quiet_NaN();
    };

    std::size_t j = 0;
    while (j < m && output_times[j] <= 0.0) record(j++);
    while (j < m) {
        const std::size_t qi = static_cast<std::size_t>(q + qb);
        const double ra = ask_active(q, qb) ? bounds.ask[qi] : 0.0;
        const double rb = bid_active(q, qb) ? bounds.bid[qi] : 0.0;
        const double total = ra + rb;
        const double cand = total > 0.0 ? t + rng.exponential(total) : std::numeric_limits<double>::infinity();
        if (cand >= output_times[j]) {
            // Memorylessness: restart the clock at the output time.
            t = output_times[j];
            advance(t);
            record(j++);
            continue;
        }
        t = cand;
        ++rec.candidates;
        const bool ask_side = rng.uniform() * total < ra;
        const Quote z = policy.at(t, q);
        const double delta = ask_side ? *z.ask : *z.bid;
        const double ratio = intensity(delta, vp) / (ask_side ? ra : rb);
        if (ratio > 1.0 + 1e-12) {
            std::ostringstream os;
            os << "thinning bound violated at t=" << t << ", q=" << q << " (ratio " << ratio << ")";
            throw NumericalError(os.str());
        }
        if (rng.uniform() >= ratio) continue;

        advance(t);
        if (contract) y += ask_side ? *z.za : *z.zb;
        if (ask_side) {
            x += s + delta;
            --q;
            ++na;
            rec.ask_income += delta;
            if (opt.record_ask_arrivals) rec.ask_arrivals.push_back(t);
        } else {
            x -= s - delta;
            ++q;
            ++nb;
            rec.bid_income += delta;
        }
    }
    return rec;
}

PathRecord simulate_path(const ContractPolicy& policy, std::uint64_t master_seed, std::uint64_t path_index,
                         const std::vector<double>& output_times, const SimulationOptions& options) {
    return simulate_path(policy, thinning_bounds(policy), master_seed, path_index, output_times, options);
}

}  // namespace mtfee
