#include "erft/error_bank.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <stdexcept>

#include "erft/errors.hpp"
#include "wire.hpp"

namespace erft {

std::size_t nearest_grid(double t, const TimestepSchedule& schedule) {
    schedule.validate();
    if (!(t >= 0.0 && t <= 1.0)) throw std::invalid_argument("nearest_grid: t outside [0, 1]");
    const std::size_t n = schedule.n_test;
    // Candidate from rounding, then settle float edge cases by comparing
    // the actual distances of the neighbors; ties go to the smaller index.
    const double scaled = t * static_cast<double>(n);
    std::size_t k0 = static_cast<std::size_t>(scaled + 0.5);
    if (k0 >= n) k0 = n - 1;
    std::size_t best = n;
    double best_dist = std::numeric_limits<double>::infinity();
    const std::size_t lo = (k0 == 0) ? 0 : k0 - 1;
    const std::size_t hi = (k0 + 1 < n) ? k0 + 1 : n - 1;
    for (std::size_t k = lo; k <= hi; ++k) {
        const double d = std::abs(t - schedule.test_point(k));
        if (d < best_dist) {
            best_dist = d;
            best = k;
        }
    }
    return best;
}

ErrorBank::ErrorBank(TimestepSchedule schedule, std::size_t capacity)
    : schedule_(schedule), capacity_(capacity) {
    schedule_.validate();
    if (capacity_ == 0) throw std::invalid_argument("ErrorBank: capacity must be positive");
    vid_grids_.resize(schedule_.n_test);
    noi_grids_.resize(schedule_.n_test);
}

std::vector<Tensor>& ErrorBank::grid(BankChannel channel, std::size_t n) {
    auto& grids = (channel == BankChannel::vid) ? vid_grids_ : noi_grids_;
    if (n >= grids.size()) throw std::invalid_argument("ErrorBank: grid index out of range");
    return grids[n];
}

const std::vector<Tensor>& ErrorBank::grid(BankChannel channel, std::size_t n) const {
    return const_cast<ErrorBank*>(this)->grid(channel, n);
}

std::size_t ErrorBank::occupancy(BankChannel channel, std::size_t n) const {
    return grid(channel, n).size();
}

std::size_t ErrorBank::total_entries() const noexcept {
    std::size_t total = 0;
    for (const auto& g : vid_grids_) total += g.size();
    for (const auto& g : noi_grids_) total += g.size();
    return total;
}

bool ErrorBank::any_vid_nonempty() const noexcept {
    for (const auto& g : vid_grids_)
        if (!g.empty()) return true;
    return false;
}

void ErrorBank::update(BankChannel channel, std::size_t n, const Tensor& error) {
    if (error.shape().size() != 2)
        throw std::invalid_argument("ErrorBank::update: expected a [t_frames x dim] error");
    if (!error.all_finite())
        throw std::invalid_argument("ErrorBank::update: non-finite error entries");
    if (entry_shape_.empty())
        entry_shape_ = error.shape();
    else if (error.shape() != entry_shape_)
        throw std::invalid_argument("ErrorBank::update: error shape differs from stored entries");

    auto& g = grid(channel, n);
    if (g.size() < capacity_) {
        g.push_back(error);
        return;
    }
    std::size_t victim = 0;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < g.size(); ++i) {
        const double d = l2_distance(g[i], error);
        if (d < best) {
            best = d;
            victim = i;
        }
    }
    g[victim] = error;
}

void ErrorBank::add_curated(const CuratedError& e) {
    const std::size_t n = nearest_grid(e.t, schedule_);
    update(BankChannel::vid, n, e.e_vid);
    update(BankChannel::noi, n, e.e_noi);
}

Tensor ErrorBank::sample_vid(std::size_t n, RngState& rng) const {
    const auto& g = grid(BankChannel::vid, n);
    if (g.empty()) throw EmptyBankError("sample_vid: grid " + std::to_string(n) + " is empty");
    return g[rng.next_index(g.size())];
}

Tensor ErrorBank::sample_noi(std::size_t n, RngState& rng) const {
    const auto& g = grid(BankChannel::noi, n);
    if (g.empty()) throw EmptyBankError("sample_noi: grid " + std::to_string(n) + " is empty");
    return g[rng.next_index(g.size())];
}

Tensor ErrorBank::sample_img(RngState& rng) const {
    std::vector<std::size_t> nonempty;
    for (std::size_t n = 0; n < vid_grids_.size(); ++n)
        if (!vid_grids_[n].empty()) nonempty.push_back(n);
    if (nonempty.empty()) throw EmptyBankError("sample_img: all vid grids are empty");
    const std::size_t n = nonempty[rng.next_index(nonempty.size())];
    const auto& g = vid_grids_[n];
    const Tensor& e = g[rng.next_index(g.size())];
    return row_of(e, rng.next_index(e.shape()[0]));
}

const std::vector<Tensor>& ErrorBank::grid_entries(BankChannel channel, std::size_t n) const {
    return grid(channel, n);
}

void ErrorBank::save(const std::filesystem::path& path) const {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw FormatError("cannot open bank snapshot for writing: " + path.string());
    wire::put_magic(os, "ERFTBANK1");
    wire::put_u32(os, static_cast<std::uint32_t>(schedule_.n_train));
    wire::put_u32(os, static_cast<std::uint32_t>(schedule_.n_test));
    const std::uint32_t t_frames = entry_shape_.empty() ? 0 : static_cast<std::uint32_t>(entry_shape_[0]);
    const std::uint32_t dim = entry_shape_.empty() ? 0 : static_cast<std::uint32_t>(entry_shape_[1]);
    wire::put_u32(os, t_frames);
    wire::put_u32(os, dim);
    wire::put_u32(os, static_cast<std::uint32_t>(capacity_));
    for (const auto* grids : {&vid_grids_, &noi_grids_}) {
        for (const auto& g : *grids) {
            wire::put_u32(os, static_cast<std::uint32_t>(g.size()));
            for (const Tensor& e : g)
                for (std::size_t i = 0; i < e.size(); ++i) wire::put_f64(os, e[i]);
        }
    }
    if (!os) throw FormatError("failed writing bank snapshot: " + path.string());
}

ErrorBank ErrorBank::load(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw FormatError("cannot open bank snapshot: " + path.string());
    wire::expect_magic(is, "ERFTBANK1");
    TimestepSchedule schedule;
    schedule.n_train = wire::get_u32(is, "n_train");
    schedule.n_test = wire::get_u32(is, "n_test");
    const std::uint32_t t_frames = wire::get_u32(is, "t_frames");
    const std::uint32_t dim = wire::get_u32(is, "dim");
    const std::uint32_t capacity = wire::get_u32(is, "capacity");
    ErrorBank bank(schedule, capacity);
    if (t_frames > 0 && dim > 0) bank.entry_shape_ = {t_frames, dim};
    for (auto* grids : {&bank.vid_grids_, &bank.noi_grids_}) {
        for (auto& g : *grids) {
            const std::uint32_t count = wire::get_u32(is, "grid count");
            if (count > capacity) throw FormatError("bank snapshot: grid count exceeds capacity");
            if (count > 0 && bank.entry_shape_.empty())
                throw FormatError("bank snapshot: entries present but shape header is zero");
            for (std::uint32_t i = 0; i < count; ++i) {
                Tensor e(bank.entry_shape_);
                for (std::size_t j = 0; j < e.size(); ++j) e[j] = wire::get_f64(is, "entry");
                g.push_back(std::move(e));
            }
        }
    }
    char extra;
    if (is.read(&extra, 1)) throw FormatError("trailing bytes after bank snapshot payload: " + path.string());
    return bank;
}

std::string ErrorBank::occupancy_csv() const {
    std::string out = "channel,grid_index,grid_t,occupancy\n";
    char line[128];
    for (std::size_t n = 0; n < schedule_.n_test; ++n) {
        std::snprintf(line, sizeof line, "vid,%zu,%.17g,%zu\n", n, schedule_.test_point(n),
                      vid_grids_[n].size());
        out += line;
    }
    for (std::size_t n = 0; n < schedule_.n_test; ++n) {
        std::snprintf(line, sizeof line, "noi,%zu,%.17g,%zu\n", n, schedule_.test_point(n),
                      noi_grids_[n].size());
        out += line;
    }
    return out;
}

void warmup_gather(std::span<const CurationStream> workers, std::size_t local_worker,
                   ErrorBank& bank, std::size_t warmup_iters) {
    if (local_worker >= workers.size())
        throw std::invalid_argument("warmup_gather: local_worker out of range");
    std::size_t max_iters = 0;
    for (const auto& w : workers) max_iters = std::max(max_iters, w.iterations.size());
    for (std::size_t it = 0; it < max_iters; ++it) {
        if (it < warmup_iters) {
            for (const auto& w : workers) {
                if (it >= w.iterations.size()) continue;
                for (const CuratedError& e : w.iterations[it]) bank.add_curated(e);
            }
        } else {
            const auto& w = workers[local_worker];
            if (it >= w.iterations.size()) continue;
            for (const CuratedError& e : w.iterations[it]) bank.add_curated(e);
        }
    }
}

} // namespace erft
