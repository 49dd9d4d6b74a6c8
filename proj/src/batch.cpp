#include "graphot/batch.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <mutex>
#include <sstream>
#include <thread>

#include "graphot/errors.hpp"
#include "json.hpp"

namespace graphot {

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double median(std::vector<double> v) {
    if (v.empty()) return 0.0;
    std::sort(v.begin(), v.end());
    const std::size_t mid = v.size() / 2;
    return v.size() % 2 == 1 ? v[mid] : 0.5 * (v[mid - 1] + v[mid]);
}
}  // namespace

PairwiseResult pairwise_matrix(const std::vector<DiscreteMeasure>& measures,
                               const PairSolver& solver, const PairwiseOptions& opts) {
    if (measures.size() < 2) throw param_error("pairwise matrix needs at least 2 measures");
    const auto n = measures.size();

    struct Task {
        std::size_t i, j;
    };
    std::vector<Task> tasks;
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t j0 = opts.symmetric ? i : 0;
        for (std::size_t j = j0; j < n; ++j) {
            if (opts.zero_diagonal && i == j) continue;
            tasks.push_back({i, j});
        }
    }

    PairwiseResult res;
    res.distances = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n),
                                          static_cast<Eigen::Index>(n));

    std::atomic<std::size_t> next{0};
    std::mutex failure_mutex;
    // TODO: give each worker a reusable delta/aggregate scratch buffer; the
    // per-solve allocation shows up on graphs with ~1e6 edges.
    auto worker = [&]() {
        while (true) {
            const std::size_t idx = next.fetch_add(1);
            if (idx >= tasks.size()) return;
            const auto [i, j] = tasks[idx];
            double d = kNaN;
            try {
                d = solver(measures[i], measures[j]);
            } catch (const std::exception& e) {
                std::lock_guard<std::mutex> lock(failure_mutex);
                res.failures.push_back({i, j, e.what()});
            }
            res.distances(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = d;
        }
    };

    const int threads = std::max(1, opts.threads);
    if (threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(threads));
        for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }

    if (opts.symmetric) {
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j)
                res.distances(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) =
                    res.distances(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    }
    std::sort(res.failures.begin(), res.failures.end(), [](const auto& a, const auto& b) {
        return a.i != b.i ? a.i < b.i : a.j < b.j;
    });
    return res;
}

Eigen::MatrixXd kernel_matrix(const Eigen::MatrixXd& distances, double t_bar, double diag_add) {
    if (!(t_bar > 0.0)) throw param_error("kernel scale must be positive");
    Eigen::MatrixXd k = (-t_bar * distances.array()).exp().matrix();
    if (diag_add != 0.0)
        k.diagonal().array() += diag_add;
    return k;
}

BenchReport bench_pairs(const std::vector<std::pair<DiscreteMeasure, DiscreteMeasure>>& pairs,
                        const PairSolver& ost_solver, const PairSolver& ept_solver,
                        double ost_preprocessing_seconds, double ept_preprocessing_seconds) {
    if (pairs.empty()) throw param_error("bench needs at least one measure pair");
    BenchReport rep;
    const double ost_amortized = ost_preprocessing_seconds / static_cast<double>(pairs.size());
    const double ept_amortized = ept_preprocessing_seconds / static_cast<double>(pairs.size());
    using clock = std::chrono::steady_clock;
    for (const auto& [mu, nu] : pairs) {
        const auto t0 = clock::now();
        (void)ost_solver(mu, nu);
        const auto t1 = clock::now();
        (void)ept_solver(mu, nu);
        const auto t2 = clock::now();
        rep.ost_seconds.push_back(std::chrono::duration<double>(t1 - t0).count() + ost_amortized);
        rep.ept_seconds.push_back(std::chrono::duration<double>(t2 - t1).count() + ept_amortized);
    }
    rep.median_ost = median(rep.ost_seconds);
    rep.median_ept = median(rep.ept_seconds);
    rep.speedup = rep.median_ept / rep.median_ost;
    return rep;
}

std::string bench_csv(const BenchReport& report) {
    std::ostringstream os;
    os.precision(9);
    os << "method,pair,seconds\n";
    for (std::size_t i = 0; i < report.ost_seconds.size(); ++i)
        os << "ost," << i << "," << report.ost_seconds[i] << "\n";
    for (std::size_t i = 0; i < report.ept_seconds.size(); ++i)
        os << "ept," << i << "," << report.ept_seconds[i] << "\n";
    return os.str();
}

void save_matrix_csv(const std::string& path, const Eigen::MatrixXd& m) {
    std::ofstream out(path);
    if (!out) throw io_error("cannot write matrix file: " + path);
    out.precision(17);
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            if (j) out << ",";
            out << m(i, j);
        }
        out << "\n";
    }
}

void save_matrix_binary(const std::string& path, const Eigen::MatrixXd& m) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw io_error("cannot write matrix file: " + path);
    nlohmann::json header = {{"rows", m.rows()},
                             {"cols", m.cols()},
                             {"dtype", "float64"},
                             {"order", "row-major"},
                             {"endian", "little"}};
    out << header.dump() << "\n";
    std::vector<double> row(static_cast<std::size_t>(m.cols()));
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) row[static_cast<std::size_t>(j)] = m(i, j);
        out.write(reinterpret_cast<const char*>(row.data()),
                  static_cast<std::streamsize>(row.size() * sizeof(double)));
    }
}

Eigen::MatrixXd load_matrix_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw io_error("cannot open matrix file: " + path);
    std::vector<std::vector<double>> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<double> row;
        std::stringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) row.push_back(std::stod(cell));
        if (!rows.empty() && row.size() != rows.front().size())
            throw io_error("ragged csv matrix: " + path);
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw io_error("empty matrix file: " + path);
    Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()),
                      static_cast<Eigen::Index>(rows.front().size()));
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < rows[i].size(); ++j)
            m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    return m;
}

Eigen::MatrixXd load_matrix_binary(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw io_error("cannot open matrix file: " + path);
    std::string header_line;
    if (!std::getline(in, header_line)) throw io_error("matrix file missing header: " + path);
    nlohmann::json header;
    try {
        header = nlohmann::json::parse(header_line);
    } catch (const nlohmann::json::exception& e) {
        throw io_error("bad matrix header in " + path + ": " + e.what());
    }
    const auto rows = header.at("rows").get<Eigen::Index>();
    const auto cols = header.at("cols").get<Eigen::Index>();
    if (header.at("dtype") != "float64") throw io_error("unsupported matrix dtype in " + path);
    Eigen::MatrixXd m(rows, cols);
    std::vector<double> row(static_cast<std::size_t>(cols));
    for (Eigen::Index i = 0; i < rows; ++i) {
        in.read(reinterpret_cast<char*>(row.data()),
                static_cast<std::streamsize>(row.size() * sizeof(double)));
        if (!in) throw io_error("truncated matrix file: " + path);
        for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = row[static_cast<std::size_t>(j)];
    }
    return m;
}

Eigen::MatrixXd load_matrix_auto(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw io_error("cannot open matrix file: " + path);
    const int first = in.peek();
    in.close();
    return first == '{' ? load_matrix_binary(path) : load_matrix_csv(path);
}

void save_failures(const std::string& path, const std::vector<PairFailure>& failures) {
    if (failures.empty()) return;
    nlohmann::json out = nlohmann::json::array();
    for (const auto& f : failures)
        out.push_back({{"i", f.i}, {"j", f.j}, {"error", f.message}});
    std::ofstream file(path);
    if (!file) throw io_error("cannot write failure sidecar: " + path);
    file << out.dump(2) << "\n";
}

std::vector<DiscreteMeasure> load_measure_dir(const std::string& dir,
                                              std::vector<std::string>* names) {
    namespace fs = std::filesystem;
    if (!fs::is_directory(dir)) throw io_error("not a directory: " + dir);
    std::vector<std::string> paths;
    for (const auto& entry : fs::directory_iterator(dir))
        if (entry.is_regular_file()) paths.push_back(entry.path().string());
    std::sort(paths.begin(), paths.end());
    std::vector<DiscreteMeasure> out;
    out.reserve(paths.size());
    for (const auto& p : paths) {
        out.push_back(load_measure(p));
        if (names) names->push_back(fs::path(p).filename().string());
    }
    return out;
}

}  // namespace graphot
