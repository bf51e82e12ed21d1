#pragma once

#include <numeric>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace pielm {

/// Per-coordinate partial derivative orders over the network inputs
/// (spatial coordinates followed by time). Total order is capped at two.
class MultiIndex {
public:
    explicit MultiIndex(std::vector<int> orders) : orders_(std::move(orders)) {
        for (int o : orders_) {
            if (o < 0) throw std::invalid_argument("multi-index orders must be nonnegative");
        }
        if (order() > 2) {
            throw std::invalid_argument("derivative order " + std::to_string(order()) +
                                        " exceeds the supported maximum of 2");
        }
    }

    static MultiIndex zero(int n) { return MultiIndex(std::vector<int>(n, 0)); }

    static MultiIndex first(int n, int j) {
        std::vector<int> o(n, 0);
        o.at(static_cast<std::size_t>(j)) = 1;
        return MultiIndex(std::move(o));
    }

    static MultiIndex second(int n, int j) {
        std::vector<int> o(n, 0);
        o.at(static_cast<std::size_t>(j)) = 2;
        return MultiIndex(std::move(o));
    }

    static MultiIndex mixed(int n, int j, int k) {
        if (j == k) return second(n, j);
        std::vector<int> o(n, 0);
        o.at(static_cast<std::size_t>(j)) = 1;
        o.at(static_cast<std::size_t>(k)) = 1;
        return MultiIndex(std::move(o));
    }

    int size() const { return static_cast<int>(orders_.size()); }
    int operator[](int j) const { return orders_[static_cast<std::size_t>(j)]; }
    const std::vector<int>& orders() const { return orders_; }

    /// Total derivative order |alpha|.
    int order() const { return std::accumulate(orders_.begin(), orders_.end(), 0); }

    /// Indices of the (at most two) differentiated coordinates, with a
    /// pure second derivative reported as the same index twice.
    std::pair<int, int> active_pair() const {
        int a = -1, b = -1;
        for (int j = 0; j < size(); ++j) {
            if (orders_[static_cast<std::size_t>(j)] == 0) continue;
            if (a < 0) {
                a = j;
                if (orders_[static_cast<std::size_t>(j)] == 2) b = j;
            } else {
                b = j;
            }
        }
        return {a, b};
    }

    bool operator==(const MultiIndex& other) const { return orders_ == other.orders_; }

private:
    std::vector<int> orders_;
};

}  // namespace pielm
