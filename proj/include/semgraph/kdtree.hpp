// Copyright 2026 The semgraph authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <Eigen/Core>
#include <algorithm>
#include <cstddef>
#include <limits>
#include <numeric>
#include <queue>
#include <utility>
#include <vector>

namespace semgraph {

// Static k-d tree over fixed-dimension real vectors (node and scan
// descriptors). Rebuilt from scratch whenever the point set changes.
class KdTree {
public:
    struct Result {
        std::size_t index;
        double distance;
    };

    KdTree() = default;
    explicit KdTree(std::vector<Eigen::VectorXd> points) { Build(std::move(points)); }

    void Build(std::vector<Eigen::VectorXd> points) {
        points_ = std::move(points);
        nodes_.clear();
        order_.resize(points_.size());
        std::iota(order_.begin(), order_.end(), std::size_t{0});
        if (!points_.empty()) root_ = BuildRange(0, points_.size());
    }

    std::size_t size() const { return points_.size(); }
    bool empty() const { return points_.empty(); }
    const Eigen::VectorXd &point(std::size_t i) const { return points_[i]; }

    // k nearest points in ascending distance (ties broken by index).
    std::vector<Result> Knn(const Eigen::VectorXd &query, std::size_t k) const {
        std::vector<Result> out;
        if (points_.empty() || k == 0) return out;
        Heap heap;
        Search(root_, query, k, heap);
        out.reserve(heap.size());
        while (!heap.empty()) {
            out.push_back({heap.top().second, std::sqrt(heap.top().first)});
            heap.pop();
        }
        std::reverse(out.begin(), out.end());
        return out;
    }

private:
    static constexpr std::size_t kLeafSize = 8;
    using Entry = std::pair<double, std::size_t>;  // squared distance, index
    using Heap = std::priority_queue<Entry>;

    struct Node {
        std::size_t begin, end;  // range in order_ (leaves only)
        int axis = -1;
        double split = 0.0;
        std::size_t left = 0, right = 0;
    };

    std::size_t BuildRange(std::size_t begin, std::size_t end) {
        Node node{begin, end};
        if (end - begin > kLeafSize) {
            const auto dim = points_[order_[begin]].size();
            Eigen::VectorXd lo = points_[order_[begin]], hi = lo;
            for (std::size_t i = begin; i < end; ++i) {
                lo = lo.cwiseMin(points_[order_[i]]);
                hi = hi.cwiseMax(points_[order_[i]]);
            }
            Eigen::Index axis = 0;
            (hi - lo).maxCoeff(&axis);
            if (dim > 0 && hi[axis] > lo[axis]) {
                const std::size_t mid = begin + (end - begin) / 2;
                std::nth_element(order_.begin() + begin, order_.begin() + mid,
                                 order_.begin() + end, [&](std::size_t a, std::size_t b) {
                                     return points_[a][axis] < points_[b][axis];
                                 });
                node.axis = static_cast<int>(axis);
                node.split = points_[order_[mid]][axis];
                const std::size_t self = nodes_.size();
                nodes_.push_back(node);
                const std::size_t left = BuildRange(begin, mid);
                const std::size_t right = BuildRange(mid, end);
                nodes_[self].left = left;
                nodes_[self].right = right;
                return self;
            }
        }
        nodes_.push_back(node);
        return nodes_.size() - 1;
    }

    void Offer(std::size_t index, double d2, std::size_t k, Heap &heap) const {
        if (heap.size() < k) {
            heap.emplace(d2, index);
        } else if (Entry(d2, index) < heap.top()) {
            heap.pop();
            heap.emplace(d2, index);
        }
    }

    void Search(std::size_t id, const Eigen::VectorXd &query, std::size_t k, Heap &heap) const {
        const Node &node = nodes_[id];
        if (node.axis < 0) {
            for (std::size_t i = node.begin; i < node.end; ++i) {
                const std::size_t index = order_[i];
                Offer(index, (points_[index] - query).squaredNorm(), k, heap);
            }
            return;
        }
        const double diff = query[node.axis] - node.split;
        const std::size_t near = diff < 0 ? node.left : node.right;
        const std::size_t far = diff < 0 ? node.right : node.left;
        Search(near, query, k, heap);
        // <= keeps equal-distance candidates on the split plane reachable
        if (heap.size() < k || diff * diff <= heap.top().first) Search(far, query, k, heap);
    }

    std::vector<Eigen::VectorXd> points_;
    std::vector<std::size_t> order_;
    std::vector<Node> nodes_;
    std::size_t root_ = 0;
};

}  // namespace semgraph
