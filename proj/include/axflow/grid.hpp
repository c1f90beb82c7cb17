#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace axflow {

// Error families. The CLI maps these onto process exit codes, so keep the
// distinction: ShapeError/ValueError for bad arguments, IoError for file
// system trouble, ParseError for malformed file contents, CapError when a
// guarded size limit is exceeded.
struct ShapeError : std::runtime_error { using std::runtime_error::runtime_error; };
struct ValueError : std::runtime_error { using std::runtime_error::runtime_error; };
struct IoError    : std::runtime_error { using std::runtime_error::runtime_error; };
struct ParseError : std::runtime_error { using std::runtime_error::runtime_error; };
struct CapError   : std::runtime_error { using std::runtime_error::runtime_error; };

// Allocation bookkeeping for every Grid payload. The benchmark uses this to
// report the real peak footprint of the volume pipeline, so all bulk float
// storage must go through the tracking allocator below.
namespace mem {
std::size_t current_bytes();
std::size_t peak_bytes();
void reset_peak();  // peak := current
namespace detail {
void add(std::size_t bytes);
void sub(std::size_t bytes);
}  // namespace detail
}  // namespace mem

template <typename T>
struct TrackingAllocator {
    using value_type = T;

    TrackingAllocator() noexcept = default;
    template <typename U>
    TrackingAllocator(const TrackingAllocator<U>&) noexcept {}

    T* allocate(std::size_t n) {
        mem::detail::add(n * sizeof(T));
        return std::allocator<T>().allocate(n);
    }
    void deallocate(T* p, std::size_t n) noexcept {
        mem::detail::sub(n * sizeof(T));
        std::allocator<T>().deallocate(p, n);
    }
    template <typename U>
    bool operator==(const TrackingAllocator<U>&) const noexcept { return true; }
};

// Dense row-major float container with a small dynamic number of extents
// (last extent varies fastest). Value semantics; moves are cheap.
class Grid {
  public:
    Grid() = default;
    explicit Grid(std::vector<int> dims);                       // zero filled
    Grid(std::vector<int> dims, std::vector<float> values);
    static Grid full(std::vector<int> dims, float value);

    int ndim() const { return static_cast<int>(dims_.size()); }
    int dim(int i) const { return dims_.at(static_cast<std::size_t>(i)); }
    const std::vector<int>& dims() const { return dims_; }
    std::size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    float* data() { return data_.data(); }
    const float* data() const { return data_.data(); }

    float& operator()(int i) { return data_[static_cast<std::size_t>(i)]; }
    float operator()(int i) const { return data_[static_cast<std::size_t>(i)]; }
    float& operator()(int i, int j) {
        return data_[static_cast<std::size_t>(i) * dims_[1] + j];
    }
    float operator()(int i, int j) const {
        return data_[static_cast<std::size_t>(i) * dims_[1] + j];
    }
    float& operator()(int i, int j, int k) {
        return data_[(static_cast<std::size_t>(i) * dims_[1] + j) * dims_[2] + k];
    }
    float operator()(int i, int j, int k) const {
        return data_[(static_cast<std::size_t>(i) * dims_[1] + j) * dims_[2] + k];
    }
    float& operator()(int i, int j, int k, int l) {
        return data_[((static_cast<std::size_t>(i) * dims_[1] + j) * dims_[2] + k) * dims_[3] + l];
    }
    float operator()(int i, int j, int k, int l) const {
        return data_[((static_cast<std::size_t>(i) * dims_[1] + j) * dims_[2] + k) * dims_[3] + l];
    }

    bool same_dims(const Grid& o) const { return dims_ == o.dims_; }
    void release() { dims_.clear(); data_ = Payload(); }

  private:
    using Payload = std::vector<float, TrackingAllocator<float>>;
    std::vector<int> dims_;
    Payload data_;
};

std::string dims_to_string(const std::vector<int>& dims);

// Worker cap for parallel_for. Results never depend on the thread count:
// work is only split across independent output elements and every per-element
// reduction runs in a fixed ascending order.
void set_threads(int n);
int threads();

// Calls fn(begin, end) on contiguous chunks covering [0, n).
void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& fn);

// Batched matrix product on the two trailing extents: (B,M,K) x (B,K,N) ->
// (B,M,N). Each output element accumulates over k in ascending order.
Grid matmul_last2(const Grid& a, const Grid& b);

// Softmax along the last extent with max subtraction. The in-place variant
// reuses the argument's storage.
Grid softmax_last(const Grid& x);
void softmax_last_inplace(Grid& x);

// Axis permutation: out dims are in.dims()[order[i]]; data reordered to match.
Grid permute(const Grid& x, const std::vector<int>& order);

// Same payload, new extents (products must match).
Grid reshape(Grid x, std::vector<int> dims);

// permute that swaps the last two extents of a 3-d grid.
Grid transpose_last2(const Grid& x);

Grid add(const Grid& a, const Grid& b);
void add_inplace(Grid& a, const Grid& b);
void scale_inplace(Grid& x, float s);
void relu_inplace(Grid& x);

// Concatenation along the last extent; leading extents must agree.
Grid concat_last(const Grid& a, const Grid& b);

// Per-cell affine map over the last extent: out[..., n] = sum_c x[..., c] *
// w(c, n) + b(n). w is (Cin, Cout); bias may be null.
Grid affine_last(const Grid& x, const Grid& w, const Grid* bias = nullptr);

bool all_finite(const Grid& x);
bool bitwise_equal(const Grid& a, const Grid& b);

}  // namespace axflow
