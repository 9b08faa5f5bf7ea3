/*
 Copyright 2026 The dlqg Authors

 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

      https://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/

#include "dlqg/simulate.hpp"

#include "dlqg/errors.hpp"
#include "logging.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <random>
#include <thread>

namespace dlqg {

namespace {

std::array<SubsystemBlock, 2> protocol_players(const GlobalSystem& system) {
    if (system.node_count() > 2) {
        throw Unsupported("the protocol simulator supports one or two nodes, got "
                          + std::to_string(system.node_count()));
    }
    std::array<SubsystemBlock, 2> out{};
    out[0] = system.partition()[0];
    out[1] = system.node_count() == 2
                 ? system.partition()[1]
                 : SubsystemBlock{system.state_dim(), 0, system.input_dim(), 0};
    return out;
}

std::vector<double> flatten(const Matrix& x) { return linalg::to_row_major(x); }

std::vector<double> flatten(const Vector& v) { return {v.data(), v.data() + v.size()}; }

}  // namespace

// ---------------------------------------------------------------------------
// Protocol

ProtocolContext::ProtocolContext(const GlobalSystem& system, const GainSchedule& gains)
    : system_(system), gains_(gains), players_(protocol_players(system)) {
    const int T = gains.horizon();
    if (static_cast<int>(gains.L1.size()) != T || static_cast<int>(gains.L2.size()) != T) {
        throw DimensionMismatch("gain schedules L0, L1, L2 have different lengths");
    }
}

ProtocolContext::ProtocolContext(const GlobalSystem& system, const GainSchedule& gains,
                                 const CostSpec& cost, const PowerConstraintSet& constraints)
    : ProtocolContext(system, gains) {
    const int T = gains.horizon();
    if (static_cast<int>(gains.S.size()) != T + 1) {
        throw InvalidInstance("online gains need S(0..T); load the certificate alongside the gains");
    }
    const PartitionedData part = partition(system, cost);
    const EffectiveCost eff(cost, constraints, gains.tau);
    for (int l = 1; l <= 2; ++l) {
        auto& online = online_gains_[static_cast<std::size_t>(l - 1)];
        for (int k = 0; k < T; ++k) {
            const auto ku = static_cast<std::size_t>(k);
            Matrix L = dlqg::local_gain(part, l, gains.S[ku + 1], eff.stage(k), k);
            const Matrix& offline = gains.local(l)[ku];
            const double gap = L.size() > 0 ? (L - offline).cwiseAbs().maxCoeff() : 0.0;
            if (L.rows() != offline.rows() || L.cols() != offline.cols()
                || !(gap <= kOnlineGainTolerance)) {
                throw InvalidInstance("unit " + std::to_string(l) + " gain at k = "
                                      + std::to_string(k)
                                      + " recomputed from S(k+1) differs from the offline schedule");
            }
            online.push_back(std::move(L));
        }
    }
}

const Matrix& ProtocolContext::local_gain(int l, int k) const {
    const auto lu = static_cast<std::size_t>(l - 1);
    const auto ku = static_cast<std::size_t>(k);
    return online() ? online_gains_[lu][ku] : gains_.local(l)[ku];
}

ProtocolStep step_protocol(const ProtocolContext& context, const ProtocolState& state, int k,
                           const Vector& w, bool record_messages) {
    const GlobalSystem& system = context.system();
    const GainSchedule& gains = context.gains();
    const Matrix& A = system.A();
    const Matrix& B = system.B();
    const int n = system.state_dim();

    ProtocolStep out;
    const bool has_history = state.x_prev.size() == n && k > 0;
    out.xhat = has_history ? Vector(A * state.x_prev + B * state.u_prev) : Vector(Vector::Zero(n));
    out.uhat = -gains.L0.at(static_cast<std::size_t>(k)) * out.xhat;
    out.u = out.uhat;
    for (std::size_t l = 0; l < 2; ++l) {
        const auto& p = context.players()[l];
        out.omega[l] = state.x.segment(p.state_offset, p.state_dim)
                       - out.xhat.segment(p.state_offset, p.state_dim);
        out.phi[l] = -context.local_gain(static_cast<int>(l) + 1, k) * out.omega[l];
        out.u.segment(p.input_offset, p.input_dim) += out.phi[l];
    }
    out.next.x = A * state.x + B * out.u + w;
    out.next.x_prev = state.x;
    out.next.u_prev = out.u;

    if (record_messages) {
        const int N = system.node_count();
        for (int i = 0; i < N; ++i) {
            const auto& p = context.players()[static_cast<std::size_t>(i)];
            if (has_history) {
                out.messages.push_back({k, i, kCoordinator, "x", 1,
                                        flatten(Vector(state.x_prev.segment(p.state_offset,
                                                                            p.state_dim)))});
                out.messages.push_back({k, i, kCoordinator, "u", 1,
                                        flatten(Vector(state.u_prev.segment(p.input_offset,
                                                                            p.input_dim)))});
            }
            if (static_cast<int>(gains.S.size()) == gains.horizon() + 1) {
                out.messages.push_back({k, kCoordinator, i, "S", 0,
                                        flatten(gains.S[static_cast<std::size_t>(k) + 1])});
            }
            out.messages.push_back({k, kCoordinator, i, "uhat", 0,
                                    flatten(Vector(out.uhat.segment(p.input_offset, p.input_dim)))});
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Monte Carlo

double SimReport::max_cross_zscore() const {
    double worst = 0.0;
    for (std::size_t k = 0; k < cross_mean.size(); ++k) {
        for (Eigen::Index e = 0; e < cross_mean[k].size(); ++e) {
            const double mean = std::abs(cross_mean[k].data()[e]);
            const double se = cross_stderr[k].data()[e];
            if (se > 0.0) {
                worst = std::max(worst, mean / se);
            } else if (mean > 0.0) {
                return std::numeric_limits<double>::infinity();
            }
        }
    }
    return worst;
}

namespace {

constexpr std::int64_t kBlockSize = 1024;

std::uint64_t splitmix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Neumaier compensated sum.
struct CompensatedSum {
    double sum = 0.0;
    double compensation = 0.0;

    void add(double v) {
        const double t = sum + v;
        if (std::abs(sum) >= std::abs(v)) {
            compensation += (sum - t) + v;
        } else {
            compensation += (v - t) + sum;
        }
        sum = t;
    }
    void merge(const CompensatedSum& other) {
        add(other.sum);
        compensation += other.compensation;
    }
    double value() const { return sum + compensation; }
};

struct Accumulator {
    std::int64_t count = 0;
    CompensatedSum cost;
    CompensatedSum cost_sq;
    std::vector<CompensatedSum> load;     // M * T, index i * T + k
    std::vector<CompensatedSum> load_sq;
    std::vector<Matrix> zz;               // k = 0..T
    std::vector<Matrix> cross;            // k = 0..T-1
    std::vector<Matrix> cross_sq;
    std::vector<TrialTrajectory> trajectories;

    Accumulator(int n, int m, int T, std::size_t M)
        : load(M * static_cast<std::size_t>(T)),
          load_sq(M * static_cast<std::size_t>(T)),
          zz(static_cast<std::size_t>(T + 1), Matrix::Zero(n + m, n + m)),
          cross(static_cast<std::size_t>(T), Matrix::Zero(n, n)),
          cross_sq(static_cast<std::size_t>(T), Matrix::Zero(n, n)) {}

    void merge(Accumulator&& other) {
        count += other.count;
        cost.merge(other.cost);
        cost_sq.merge(other.cost_sq);
        for (std::size_t i = 0; i < load.size(); ++i) {
            load[i].merge(other.load[i]);
            load_sq[i].merge(other.load_sq[i]);
        }
        for (std::size_t k = 0; k < zz.size(); ++k) {
            zz[k] += other.zz[k];
        }
        for (std::size_t k = 0; k < cross.size(); ++k) {
            cross[k] += other.cross[k];
            cross_sq[k] += other.cross_sq[k];
        }
        for (auto& t : other.trajectories) {
            trajectories.push_back(std::move(t));
        }
    }
};

struct TrialRunner {
    const ProtocolContext& context;
    const CostSpec& cost;
    const PowerConstraintSet& constraints;
    Matrix sqrt_x;
    Matrix sqrt_w;
    std::uint64_t seed;
    bool record;

    Vector draw(std::mt19937_64& gen, std::normal_distribution<double>& normal,
                const Matrix& root) const {
        Vector xi(root.cols());
        for (Eigen::Index i = 0; i < xi.size(); ++i) {
            xi(i) = normal(gen);
        }
        return root * xi;
    }

    void run(std::int64_t trial, Accumulator& acc) const {
        const GlobalSystem& system = context.system();
        const int n = system.state_dim();
        const int m = system.input_dim();
        const int T = context.horizon();
        const std::size_t M = constraints.size();

        std::mt19937_64 gen(splitmix64(seed ^ splitmix64(static_cast<std::uint64_t>(trial))));
        std::normal_distribution<double> normal(0.0, 1.0);

        ProtocolState state;
        state.x = draw(gen, normal, sqrt_x);
        TrialTrajectory traj;
        traj.trial = trial;

        double total = 0.0;
        Vector z(n + m);
        for (int k = 0; k < T; ++k) {
            const auto ku = static_cast<std::size_t>(k);
            const Vector w = draw(gen, normal, sqrt_w);
            ProtocolStep step = step_protocol(context, state, k, w, record);
            z << state.x, step.u;
            total += z.dot(cost.Q() * z);
            for (std::size_t i = 0; i < M; ++i) {
                const double load = z.dot(constraints[i].W * z);
                acc.load[i * static_cast<std::size_t>(T) + ku].add(load);
                acc.load_sq[i * static_cast<std::size_t>(T) + ku].add(load * load);
            }
            acc.zz[ku].noalias() += z * z.transpose();
            const Vector omega = state.x - step.xhat;
            const Matrix c = step.xhat * omega.transpose();
            acc.cross[ku] += c;
            acc.cross_sq[ku] += c.cwiseAbs2();
            if (record) {
                traj.x.push_back(state.x);
                traj.u.push_back(step.u);
                traj.xhat.push_back(step.xhat);
                traj.omega.push_back(omega);
                for (auto& msg : step.messages) {
                    traj.messages.push_back(std::move(msg));
                }
            }
            state = std::move(step.next);
        }
        total += state.x.dot(cost.Q_T() * state.x);
        z << state.x, Vector::Zero(m);
        acc.zz[static_cast<std::size_t>(T)].noalias() += z * z.transpose();
        acc.cost.add(total);
        acc.cost_sq.add(total * total);
        ++acc.count;
        if (record) {
            traj.x.push_back(state.x);
            acc.trajectories.push_back(std::move(traj));
        }
    }
};

double standard_error(double sum, double sum_sq, std::int64_t count) {
    if (count < 2) {
        return 0.0;
    }
    const double N = static_cast<double>(count);
    const double mean = sum / N;
    const double var = std::max(0.0, (sum_sq / N - mean * mean) * N / (N - 1.0));
    return std::sqrt(var / N);
}

}  // namespace

SimReport run_monte_carlo(const GlobalSystem& system, const GainSchedule& gains,
                          const CostSpec& cost, const PowerConstraintSet& constraints,
                          const SimConfig& config) {
    if (config.trials < 1) {
        throw InvalidInstance("trials must be at least 1");
    }
    const int T = cost.horizon();
    if (gains.horizon() != T) {
        throw DimensionMismatch("gain schedule covers " + std::to_string(gains.horizon())
                                + " stages, the cost horizon is " + std::to_string(T));
    }
    const int n = system.state_dim();
    const int m = system.input_dim();
    const std::size_t M = constraints.size();
    constraints.check_compatible(n + m, T);

    const ProtocolContext context = config.gains_online
                                        ? ProtocolContext(system, gains, cost, constraints)
                                        : ProtocolContext(system, gains);
    const CovarianceTrajectory analytic = propagate_closed_loop(system, gains, constraints);

    const TrialRunner runner{context,
                             cost,
                             constraints,
                             linalg::psd_sqrt(system.sigma_x()),
                             linalg::psd_sqrt(system.sigma_w()),
                             config.seed,
                             config.record_trajectories};

    const std::int64_t blocks = (config.trials + kBlockSize - 1) / kBlockSize;
    std::vector<Accumulator> partial(static_cast<std::size_t>(blocks), Accumulator(n, m, T, M));
    std::atomic<std::int64_t> next_block{0};
    auto worker = [&] {
        for (std::int64_t b = next_block++; b < blocks; b = next_block++) {
            auto& acc = partial[static_cast<std::size_t>(b)];
            const std::int64_t end = std::min(config.trials, (b + 1) * kBlockSize);
            for (std::int64_t trial = b * kBlockSize; trial < end; ++trial) {
                runner.run(trial, acc);
            }
        }
    };
    const int threads =
        static_cast<int>(std::clamp<std::int64_t>(config.threads, 1, std::max<std::int64_t>(blocks, 1)));
    if (threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < threads; ++t) {
            pool.emplace_back(worker);
        }
        for (auto& th : pool) {
            th.join();
        }
    }

    // Fixed pairwise tree reduction.
    while (partial.size() > 1) {
        std::vector<Accumulator> level;
        for (std::size_t i = 0; i + 1 < partial.size(); i += 2) {
            partial[i].merge(std::move(partial[i + 1]));
            level.push_back(std::move(partial[i]));
        }
        if (partial.size() % 2 == 1) {
            level.push_back(std::move(partial.back()));
        }
        partial = std::move(level);
    }
    Accumulator& acc = partial.front();
    const double N = static_cast<double>(acc.count);

    SimReport report;
    report.trials = acc.count;
    report.seed = config.seed;
    report.cost_mean = acc.cost.value() / N;
    report.cost_stderr = standard_error(acc.cost.value(), acc.cost_sq.value(), acc.count);
    report.analytic_cost = analytic.cost(cost);
    report.analytic_loads = analytic.loads;
    report.load_mean = Matrix::Zero(static_cast<Eigen::Index>(M), T);
    report.load_stderr = Matrix::Zero(static_cast<Eigen::Index>(M), T);
    for (std::size_t i = 0; i < M; ++i) {
        for (int k = 0; k < T; ++k) {
            const auto idx = i * static_cast<std::size_t>(T) + static_cast<std::size_t>(k);
            const auto row = static_cast<Eigen::Index>(i);
            report.load_mean(row, k) = acc.load[idx].value() / N;
            report.load_stderr(row, k) =
                standard_error(acc.load[idx].value(), acc.load_sq[idx].value(), acc.count);
            if (report.load_mean(row, k)
                > constraints[i].budgets[static_cast<std::size_t>(k)] + 3.0 * report.load_stderr(row, k)) {
                ++report.violations;
            }
        }
    }
    for (int k = 0; k <= T; ++k) {
        const auto ku = static_cast<std::size_t>(k);
        report.covariance_gap.push_back((acc.zz[ku] / N - analytic.aggregate[ku]).norm());
    }
    for (int k = 0; k < T; ++k) {
        const auto ku = static_cast<std::size_t>(k);
        const Matrix mean = acc.cross[ku] / N;
        Matrix se = Matrix::Zero(n, n);
        for (Eigen::Index e = 0; e < se.size(); ++e) {
            se.data()[e] = standard_error(acc.cross[ku].data()[e], acc.cross_sq[ku].data()[e], acc.count);
        }
        report.cross_mean.push_back(mean);
        report.cross_stderr.push_back(std::move(se));
    }
    report.trajectories = std::move(acc.trajectories);
    detail::logger().info("simulated {} trials: cost {:.6g} +- {:.2g} (analytic {:.6g})",
                          report.trials, report.cost_mean, report.cost_stderr, report.analytic_cost);
    return report;
}

}  // namespace dlqg
