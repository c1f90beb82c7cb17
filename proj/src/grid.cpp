#include "axflow/grid.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstring>
#include <numeric>
#include <sstream>
#include <thread>

namespace axflow {

namespace mem {
namespace {
std::atomic<std::size_t> g_current{0};
std::atomic<std::size_t> g_peak{0};
}  // namespace

std::size_t current_bytes() { return g_current.load(std::memory_order_relaxed); }
std::size_t peak_bytes() { return g_peak.load(std::memory_order_relaxed); }

void reset_peak() { g_peak.store(g_current.load(std::memory_order_relaxed), std::memory_order_relaxed); }

namespace detail {
void add(std::size_t bytes) {
    std::size_t now = g_current.fetch_add(bytes, std::memory_order_relaxed) + bytes;
    std::size_t peak = g_peak.load(std::memory_order_relaxed);
    while (now > peak && !g_peak.compare_exchange_weak(peak, now, std::memory_order_relaxed)) {
    }
}
void sub(std::size_t bytes) { g_current.fetch_sub(bytes, std::memory_order_relaxed); }
}  // namespace detail
}  // namespace mem

std::string dims_to_string(const std::vector<int>& dims) {
    std::ostringstream os;
    for (std::size_t i = 0; i < dims.size(); ++i) {
        if (i) os << 'x';
        os << dims[i];
    }
    return os.str();
}

namespace {

std::size_t checked_count(const std::vector<int>& dims) {
    if (dims.empty()) throw ShapeError("grid: empty extent list");
    std::size_t n = 1;
    for (int d : dims) {
        if (d <= 0) throw ShapeError("grid: non-positive extent in " + dims_to_string(dims));
        if (n > (static_cast<std::size_t>(1) << 40) / static_cast<std::size_t>(d))
            throw CapError("grid: extent product overflow in " + dims_to_string(dims));
        n *= static_cast<std::size_t>(d);
    }
    return n;
}

}  // namespace

Grid::Grid(std::vector<int> dims) : dims_(std::move(dims)) {
    data_.assign(checked_count(dims_), 0.0f);
}

Grid::Grid(std::vector<int> dims, std::vector<float> values) : dims_(std::move(dims)) {
    std::size_t n = checked_count(dims_);
    if (n != values.size())
        throw ShapeError("grid: " + std::to_string(values.size()) + " values for extents " +
                         dims_to_string(dims_));
    data_.assign(values.begin(), values.end());
}

Grid Grid::full(std::vector<int> dims, float value) {
    Grid g(std::move(dims));
    std::fill(g.data_.begin(), g.data_.end(), value);
    return g;
}

namespace {
std::atomic<int> g_threads{1};
}

void set_threads(int n) {
    if (n < 1) throw ValueError("set_threads: thread count must be >= 1");
    g_threads.store(n, std::memory_order_relaxed);
}

int threads() { return g_threads.load(std::memory_order_relaxed); }

void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& fn) {
    if (n == 0) return;
    std::size_t workers = static_cast<std::size_t>(threads());
    workers = std::min(workers, n);
    if (workers <= 1) {
        fn(0, n);
        return;
    }
    std::size_t chunk = (n + workers - 1) / workers;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        std::size_t begin = w * chunk;
        std::size_t end = std::min(begin + chunk, n);
        if (begin >= end) break;
        pool.emplace_back(fn, begin, end);
    }
    for (auto& t : pool) t.join();
}

Grid matmul_last2(const Grid& a, const Grid& b) {
    if (a.ndim() != 3 || b.ndim() != 3)
        throw ShapeError("matmul_last2: expected 3-d grids, got " + dims_to_string(a.dims()) +
                         " and " + dims_to_string(b.dims()));
    if (a.dim(0) != b.dim(0) || a.dim(2) != b.dim(1))
        throw ShapeError("matmul_last2: incompatible extents " + dims_to_string(a.dims()) +
                         " and " + dims_to_string(b.dims()));
    const int bs = a.dim(0), m = a.dim(1), kk = a.dim(2), n = b.dim(2);
    Grid out({bs, m, n});
    const float* pa = a.data();
    const float* pb = b.data();
    float* po = out.data();
    std::size_t rows = static_cast<std::size_t>(bs) * static_cast<std::size_t>(m);
    parallel_for(rows, [&](std::size_t begin, std::size_t end) {
        for (std::size_t row = begin; row < end; ++row) {
            std::size_t batch = row / static_cast<std::size_t>(m);
            const float* arow = pa + row * static_cast<std::size_t>(kk);
            const float* bmat = pb + batch * static_cast<std::size_t>(kk) * static_cast<std::size_t>(n);
            float* orow = po + row * static_cast<std::size_t>(n);
            std::memset(orow, 0, static_cast<std::size_t>(n) * sizeof(float));
            for (int k = 0; k < kk; ++k) {
                const float av = arow[k];
                const float* brow = bmat + static_cast<std::size_t>(k) * static_cast<std::size_t>(n);
                for (int j = 0; j < n; ++j) orow[j] += av * brow[j];
            }
        }
    });
    return out;
}

void softmax_last_inplace(Grid& x) {
    if (x.ndim() < 1) throw ShapeError("softmax_last: empty grid");
    const int n = x.dim(x.ndim() - 1);
    std::size_t slices = x.size() / static_cast<std::size_t>(n);
    float* p = x.data();
    parallel_for(slices, [&](std::size_t begin, std::size_t end) {
        for (std::size_t s = begin; s < end; ++s) {
            float* row = p + s * static_cast<std::size_t>(n);
            float mx = row[0];
            for (int i = 1; i < n; ++i) mx = std::max(mx, row[i]);
            float sum = 0.0f;
            for (int i = 0; i < n; ++i) {
                row[i] = std::exp(row[i] - mx);
                sum += row[i];
            }
            for (int i = 0; i < n; ++i) row[i] /= sum;
        }
    });
}

Grid softmax_last(const Grid& x) {
    Grid out = x;
    softmax_last_inplace(out);
    return out;
}

Grid permute(const Grid& x, const std::vector<int>& order) {
    const int nd = x.ndim();
    if (static_cast<int>(order.size()) != nd)
        throw ShapeError("permute: order size " + std::to_string(order.size()) + " for " +
                         dims_to_string(x.dims()));
    std::vector<bool> seen(static_cast<std::size_t>(nd), false);
    for (int o : order) {
        if (o < 0 || o >= nd || seen[static_cast<std::size_t>(o)])
            throw ShapeError("permute: invalid axis order");
        seen[static_cast<std::size_t>(o)] = true;
    }
    std::vector<int> odims(static_cast<std::size_t>(nd));
    for (int i = 0; i < nd; ++i) odims[static_cast<std::size_t>(i)] = x.dim(order[static_cast<std::size_t>(i)]);

    std::vector<std::size_t> istrides(static_cast<std::size_t>(nd), 1);
    for (int i = nd - 2; i >= 0; --i)
        istrides[static_cast<std::size_t>(i)] =
            istrides[static_cast<std::size_t>(i + 1)] * static_cast<std::size_t>(x.dim(i + 1));
    // stride in the input for each output axis
    std::vector<std::size_t> ostrides(static_cast<std::size_t>(nd));
    for (int i = 0; i < nd; ++i) ostrides[static_cast<std::size_t>(i)] = istrides[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])];

    Grid out(odims);
    const float* pin = x.data();
    float* pout = out.data();
    std::size_t outer = out.size() / static_cast<std::size_t>(odims.back());
    const int last = odims.back();
    const std::size_t last_stride = ostrides.back();
    parallel_for(outer, [&](std::size_t begin, std::size_t end) {
        for (std::size_t o = begin; o < end; ++o) {
            std::size_t rem = o;
            std::size_t src = 0;
            for (int i = nd - 2; i >= 0; --i) {
                std::size_t coord = rem % static_cast<std::size_t>(odims[static_cast<std::size_t>(i)]);
                rem /= static_cast<std::size_t>(odims[static_cast<std::size_t>(i)]);
                src += coord * ostrides[static_cast<std::size_t>(i)];
            }
            float* dst = pout + o * static_cast<std::size_t>(last);
            for (int j = 0; j < last; ++j) dst[j] = pin[src + static_cast<std::size_t>(j) * last_stride];
        }
    });
    return out;
}

Grid reshape(Grid x, std::vector<int> dims) {
    std::size_t n = checked_count(dims);
    if (n != x.size())
        throw ShapeError("reshape: cannot view " + dims_to_string(x.dims()) + " as " +
                         dims_to_string(dims));
    std::vector<float> payload(x.data(), x.data() + x.size());
    return Grid(std::move(dims), std::move(payload));
}

Grid transpose_last2(const Grid& x) {
    if (x.ndim() != 3) throw ShapeError("transpose_last2: expected 3-d grid, got " + dims_to_string(x.dims()));
    return permute(x, {0, 2, 1});
}

Grid add(const Grid& a, const Grid& b) {
    if (!a.same_dims(b))
        throw ShapeError("add: extents " + dims_to_string(a.dims()) + " vs " + dims_to_string(b.dims()));
    Grid out = a;
    add_inplace(out, b);
    return out;
}

void add_inplace(Grid& a, const Grid& b) {
    if (!a.same_dims(b))
        throw ShapeError("add: extents " + dims_to_string(a.dims()) + " vs " + dims_to_string(b.dims()));
    float* pa = a.data();
    const float* pb = b.data();
    for (std::size_t i = 0; i < a.size(); ++i) pa[i] += pb[i];
}

void scale_inplace(Grid& x, float s) {
    float* p = x.data();
    for (std::size_t i = 0; i < x.size(); ++i) p[i] *= s;
}

void relu_inplace(Grid& x) {
    float* p = x.data();
    for (std::size_t i = 0; i < x.size(); ++i) p[i] = p[i] > 0.0f ? p[i] : 0.0f;
}

Grid concat_last(const Grid& a, const Grid& b) {
    if (a.ndim() != b.ndim())
        throw ShapeError("concat_last: rank mismatch " + dims_to_string(a.dims()) + " vs " +
                         dims_to_string(b.dims()));
    const int nd = a.ndim();
    for (int i = 0; i + 1 < nd; ++i)
        if (a.dim(i) != b.dim(i))
            throw ShapeError("concat_last: extents " + dims_to_string(a.dims()) + " vs " +
                             dims_to_string(b.dims()));
    std::vector<int> odims = a.dims();
    const int na = a.dim(nd - 1), nb = b.dim(nd - 1);
    odims.back() = na + nb;
    Grid out(odims);
    std::size_t slices = a.size() / static_cast<std::size_t>(na);
    const float* pa = a.data();
    const float* pb = b.data();
    float* po = out.data();
    for (std::size_t s = 0; s < slices; ++s) {
        std::memcpy(po + s * static_cast<std::size_t>(na + nb), pa + s * static_cast<std::size_t>(na),
                    static_cast<std::size_t>(na) * sizeof(float));
        std::memcpy(po + s * static_cast<std::size_t>(na + nb) + na, pb + s * static_cast<std::size_t>(nb),
                    static_cast<std::size_t>(nb) * sizeof(float));
    }
    return out;
}

Grid affine_last(const Grid& x, const Grid& w, const Grid* bias) {
    if (x.ndim() < 1 || w.ndim() != 2)
        throw ShapeError("affine_last: got " + dims_to_string(x.dims()) + " and " + dims_to_string(w.dims()));
    const int cin = x.dim(x.ndim() - 1);
    if (w.dim(0) != cin)
        throw ShapeError("affine_last: input channels " + std::to_string(cin) + " vs weight " +
                         dims_to_string(w.dims()));
    const int cout = w.dim(1);
    if (bias && (bias->ndim() != 1 || bias->dim(0) != cout))
        throw ShapeError("affine_last: bias extents " + dims_to_string(bias->dims()));
    std::vector<int> odims = x.dims();
    odims.back() = cout;
    Grid out(odims);
    std::size_t cells = x.size() / static_cast<std::size_t>(cin);
    const float* px = x.data();
    const float* pw = w.data();
    const float* pbias = bias ? bias->data() : nullptr;
    float* po = out.data();
    parallel_for(cells, [&](std::size_t begin, std::size_t end) {
        for (std::size_t cell = begin; cell < end; ++cell) {
            const float* xi = px + cell * static_cast<std::size_t>(cin);
            float* oi = po + cell * static_cast<std::size_t>(cout);
            if (pbias)
                std::memcpy(oi, pbias, static_cast<std::size_t>(cout) * sizeof(float));
            else
                std::memset(oi, 0, static_cast<std::size_t>(cout) * sizeof(float));
            for (int c = 0; c < cin; ++c) {
                const float xv = xi[c];
                const float* wrow = pw + static_cast<std::size_t>(c) * static_cast<std::size_t>(cout);
                for (int n = 0; n < cout; ++n) oi[n] += xv * wrow[n];
            }
        }
    });
    return out;
}

bool all_finite(const Grid& x) {
    const float* p = x.data();
    for (std::size_t i = 0; i < x.size(); ++i)
        if (!std::isfinite(p[i])) return false;
    return true;
}

bool bitwise_equal(const Grid& a, const Grid& b) {
    if (!a.same_dims(b)) return false;
    return std::memcmp(a.data(), b.data(), a.size() * sizeof(float)) == 0;
}

}  // namespace axflow
