#include "mtfee/csv.hpp"

#include "mtfee/errors.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>

namespace mtfee {

namespace {

std::ofstream open(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ValidationError("cannot write '" + path + "'");
    out << std::setprecision(17);
    return out;
}

void close(std::ofstream& out, const std::string& path) {
    out.close();
    if (!out) throw ValidationError("error writing '" + path + "'");
}

void header(std::ofstream& out, const RegimeSpec& s) {
    out << "# regime=" << to_string(s.regime) << " C=" << s.c << " C_prime=" << s.c_prime << " T=" << s.T
        << " q_bar=" << s.q_bar << " N=" << s.n << " theta=" << s.theta << '\n';
}

void cell(std::ofstream& out, const std::optional<double>& v) {
    out << ',';
    if (v) out << *v;
}

}  // namespace

void write_value_grid_csv(const std::string& path, const ValueGrid& grid) {
    auto out = open(path);
    header(out, grid.spec());
    out << "t,q,log_u\n";
    for (std::size_t i = 0; i < grid.times().size(); ++i)
        for (int q = -grid.q_bar(); q <= grid.q_bar(); ++q)
            out << grid.times()[i] << ',' << q << ',' << grid.log_u(i, q) << '\n';
    close(out, path);
}

void write_log_ratio_csv(const std::string& path, const LogRatioGrid& grid) {
    auto out = open(path);
    header(out, grid.spec);
    out << "t,q,v_plus\n";
    for (std::size_t i = 0; i < grid.times.size(); ++i)
        for (int q = -grid.spec.q_bar; q < grid.spec.q_bar; ++q)
            out << grid.times[i] << ',' << q << ',' << grid.at(i, q) << '\n';
    close(out, path);
}

void write_policy_csv(const std::string& path, const ContractPolicy& policy, const std::vector<double>& times) {
    auto out = open(path);
    out << "# policy=" << to_string(policy.kind()) << " y0=" << policy.y0() << " N=" << policy.n_exchanges() << '\n';
    out << "t,q,zS,za,zb,ask_spread,bid_spread\n";
    const int qb = policy.params().model().q_bar;
    const bool contract = policy.has_contract();
    for (double t : times) {
        for (int q = -qb; q <= qb; ++q) {
            const Quote z = policy.at(t, q);
            out << t << ',' << q;
            cell(out, contract ? std::optional<double>(z.zs) : std::nullopt);
            cell(out, z.za);
            cell(out, z.zb);
            cell(out, z.ask);
            cell(out, z.bid);
            out << '\n';
        }
    }
    close(out, path);
}

void write_regime_csv(const std::string& path, const RegimeStats& stats) {
    auto out = open(path);
    out << 't';
    for (Series s : kAllSeries) out << ',' << series_name(s) << "_mean," << series_name(s) << "_ci95";
    out << ",spread_count\n";
    for (std::size_t j = 0; j < stats.times.size(); ++j) {
        out << stats.times[j];
        for (Series s : kAllSeries) {
            const RunningStats& r = stats.at(s, j);
            out << ',';
            if (r.n > 0) out << r.mean;
            out << ',';
            if (r.n > 0) out << r.ci95();
        }
        out << ',' << stats.at(Series::spread, j).n << '\n';
    }
    close(out, path);
}

}  // namespace mtfee
