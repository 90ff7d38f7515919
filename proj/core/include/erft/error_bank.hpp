#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "erft/flow.hpp"
#include "erft/rng.hpp"
#include "erft/tensor.hpp"

namespace erft {

// Index of the test-grid point nearest to t; ties break toward the
// smaller index.
std::size_t nearest_grid(double t, const TimestepSchedule& schedule);

enum class BankChannel { vid, noi };

// One curated error pair, tagged with the training timestep it was
// observed at.
struct CuratedError {
    double t = 0.0;
    Tensor e_vid; // [t_frames x dim]
    Tensor e_noi; // [t_frames x dim]
};

// A worker's curation history: curated.iterations[i] holds everything the
// worker produced during training iteration i.
struct CurationStream {
    std::vector<std::vector<CuratedError>> iterations;
};

// Timestep-gridded error replay memory: one bounded grid of error tensors
// per test timestep and channel. When a grid is full, the incoming error
// replaces the stored entry nearest to it in L2, which preserves diversity.
class ErrorBank {
public:
    ErrorBank() = default;
    ErrorBank(TimestepSchedule schedule, std::size_t capacity);

    const TimestepSchedule& schedule() const noexcept { return schedule_; }
    std::size_t capacity() const noexcept { return capacity_; }
    std::size_t grid_count() const noexcept { return schedule_.n_test; }

    std::size_t occupancy(BankChannel channel, std::size_t n) const;
    std::size_t total_entries() const noexcept;
    bool any_vid_nonempty() const noexcept;

    // Append, or replace the L2-nearest entry once the grid is at capacity.
    void update(BankChannel channel, std::size_t n, const Tensor& error);

    // Bank both channels of one curated error at nearest_grid(e.t).
    void add_curated(const CuratedError& e);

    // Uniform draw from grid n of the given channel. Empty grid raises
    // EmptyBankError; callers fall back to clean inputs.
    Tensor sample_vid(std::size_t n, RngState& rng) const;
    Tensor sample_noi(std::size_t n, RngState& rng) const;

    // Uniform over non-empty vid grids (independent of any current t),
    // then uniform over entries, then a uniform temporal slice.
    Tensor sample_img(RngState& rng) const;

    const std::vector<Tensor>& grid_entries(BankChannel channel, std::size_t n) const;

    // Snapshot: magic "ERFTBANK1", little-endian uint32 header
    // (n_train, n_test, t_frames, dim, capacity), then per channel and grid
    // a uint32 count followed by the entries as little-endian f64.
    void save(const std::filesystem::path& path) const;
    static ErrorBank load(const std::filesystem::path& path);

    // CSV lines "channel,grid_index,grid_t,occupancy" for reporting.
    std::string occupancy_csv() const;

private:
    std::vector<Tensor>& grid(BankChannel channel, std::size_t n);
    const std::vector<Tensor>& grid(BankChannel channel, std::size_t n) const;

    TimestepSchedule schedule_;
    std::size_t capacity_ = 500;
    std::vector<std::size_t> entry_shape_; // fixed by the first update
    std::vector<std::vector<Tensor>> vid_grids_;
    std::vector<std::vector<Tensor>> noi_grids_;
};

// Federated-style warmup: for iterations 0..warmup_iters-1 every worker's
// curated errors are merged into the bank in worker order; from iteration
// warmup_iters on, only workers[local_worker] contributes.
void warmup_gather(std::span<const CurationStream> workers, std::size_t local_worker,
                   ErrorBank& bank, std::size_t warmup_iters);

} // namespace erft
