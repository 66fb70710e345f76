#pragma once

#include <cassert>
#include <cstddef>
#include <numeric>
#include <vector>

namespace dih {

// Dense row-major tensor. Activations are (channels, height, width);
// weights use whatever layout their layer documents.
template <class T>
struct Tensor {
    std::vector<int> shape;
    std::vector<T> v;

    Tensor() = default;
    explicit Tensor(std::vector<int> s) : shape(std::move(s)) {
        v.assign(numel_of(shape), T(0));
    }

    static size_t numel_of(const std::vector<int>& s) {
        size_t n = 1;
        for (int e : s) n *= static_cast<size_t>(e);
        return n;
    }

    size_t numel() const { return v.size(); }
    T* data() { return v.data(); }
    const T* data() const { return v.data(); }

    int extent(int i) const { return shape[static_cast<size_t>(i)]; }

    void fill(T value) { std::fill(v.begin(), v.end(), value); }

    // (c,h,w) accessor for activation tensors
    T& at(int c, int y, int x) {
        return v[(static_cast<size_t>(c) * shape[1] + y) * shape[2] + x];
    }
    T at(int c, int y, int x) const {
        return v[(static_cast<size_t>(c) * shape[1] + y) * shape[2] + x];
    }
};

} // namespace dih
