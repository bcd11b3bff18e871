// Copyright 2026 The MemAudit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Near-duplicate detection: thumbnail descriptors, exact k-NN graph,
// 1-NN distance histogram, thresholded connected components.

#include <Eigen/Core>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "memaudit/error.hpp"
#include "memaudit/image.hpp"
#include "memaudit/parallel.hpp"
#include "memaudit/synthetic.hpp"

namespace memaudit {

inline constexpr int kThumbnailSide = 8;
inline constexpr int kColorGridSide = 4;
inline constexpr std::size_t kDescriptorDim =
    kThumbnailSide * kThumbnailSide + 3 * kColorGridSide * kColorGridSide;  // 112
inline constexpr std::size_t kDefaultKnn = 4;

struct DescriptorRecord {
  std::string id;
  std::vector<float> vector;
};

namespace detail {

// Mean of plane `c` (or of the luminance when c < 0) over a grid cell.
inline double block_mean(const Image& img, int c, int y0, int x0, int bh, int bw) {
  double sum = 0.0;
  for (int y = y0; y < y0 + bh; ++y) {
    for (int x = x0; x < x0 + bw; ++x) {
      sum += c >= 0 ? img.at(c, y, x)
                    : 0.299 * img.at(0, y, x) + 0.587 * img.at(1, y, x) + 0.114 * img.at(2, y, x);
    }
  }
  return sum / (bh * bw);
}

}  // namespace detail

// 8x8 grayscale thumbnail followed by the 4x4 block-mean RGB grid, scaled to
// unit L2 norm. An all-zero (black) image maps to the uniform unit vector.
inline DescriptorRecord describe(const Image& img, std::string id) {
  const ImageShape& s = img.shape();
  if (s.channels != 3 || s.height % kThumbnailSide != 0 || s.width % kThumbnailSide != 0) {
    throw ArgumentError("describe needs an RGB image with sides divisible by 8");
  }
  std::vector<double> v;
  v.reserve(kDescriptorDim);
  const int th = s.height / kThumbnailSide, tw = s.width / kThumbnailSide;
  for (int by = 0; by < kThumbnailSide; ++by) {
    for (int bx = 0; bx < kThumbnailSide; ++bx) v.push_back(detail::block_mean(img, -1, by * th, bx * tw, th, tw));
  }
  const int ch = s.height / kColorGridSide, cw = s.width / kColorGridSide;
  for (int c = 0; c < 3; ++c) {
    for (int by = 0; by < kColorGridSide; ++by) {
      for (int bx = 0; bx < kColorGridSide; ++bx) v.push_back(detail::block_mean(img, c, by * ch, bx * cw, ch, cw));
    }
  }
  double norm = 0.0;
  for (double x : v) norm += x * x;
  norm = std::sqrt(norm);
  DescriptorRecord r{std::move(id), std::vector<float>(kDescriptorDim)};
  for (std::size_t i = 0; i < kDescriptorDim; ++i) {
    r.vector[i] = static_cast<float>(norm > 0.0 ? v[i] / norm : 1.0 / std::sqrt(static_cast<double>(kDescriptorDim)));
  }
  return r;
}

inline double squared_distance(std::span<const float> a, std::span<const float> b) {
  if (a.size() != b.size()) throw ArgumentError("descriptor dimension mismatch");
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double t = static_cast<double>(a[i]) - static_cast<double>(b[i]);
    d += t * t;
  }
  return d;
}

// ------------------------------------------------------------- k-NN graph

struct KnnEdge {
  std::size_t source = 0;  // record indices
  std::size_t target = 0;
  double distance = 0.0;   // squared L2
  bool operator==(const KnnEdge&) const = default;
};

namespace detail {

inline void check_records(std::span<const DescriptorRecord> records) {
  if (records.empty()) return;
  const std::size_t dim = records.front().vector.size();
  for (const auto& r : records) {
    if (r.vector.size() != dim) throw InputError("descriptor dimension differs for '" + r.id + "'");
  }
}

// rank[i] = position of records[i].id in lexicographic id order.
inline std::vector<std::size_t> id_ranks(std::span<const DescriptorRecord> records) {
  std::vector<std::size_t> order(records.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return records[a].id < records[b].id; });
  std::vector<std::size_t> rank(records.size());
  for (std::size_t i = 0; i < order.size(); ++i) rank[order[i]] = i;
  return rank;
}

}  // namespace detail

// Exact k nearest neighbours of every record, nearest first. Ties in
// distance go to the smaller id. k is clamped to size - 1. Candidates are
// screened with Gram-matrix distances and then re-ranked on the direct
// squared_distance, so results equal a brute-force sort.
inline std::vector<KnnEdge> knn_graph(std::span<const DescriptorRecord> records,
                                      std::size_t k = kDefaultKnn) {
  if (records.size() < 2) throw ArgumentError("knn_graph needs at least two records");
  if (k < 1) throw ArgumentError("k must be >= 1");
  detail::check_records(records);
  k = std::min(k, records.size() - 1);
  const auto rank = detail::id_ranks(records);
  const auto n = static_cast<Eigen::Index>(records.size());
  const auto dim = static_cast<Eigen::Index>(records.front().vector.size());
  Eigen::MatrixXd x(dim, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index t = 0; t < dim; ++t) x(t, j) = records[static_cast<std::size_t>(j)].vector[static_cast<std::size_t>(t)];
  }
  const Eigen::VectorXd sq = x.colwise().squaredNorm().transpose();
  // Screening slack: far above the rounding error of the Gram expansion.
  const double slack = 1e-9 * std::max(1.0, sq.maxCoeff());
  constexpr Eigen::Index kChunk = 256;
  const auto chunks = static_cast<std::size_t>((n + kChunk - 1) / kChunk);

  auto rows = parallel_map(chunks, [&](std::size_t chunk) {
    const Eigen::Index begin = static_cast<Eigen::Index>(chunk) * kChunk;
    const Eigen::Index len = std::min(kChunk, n - begin);
    Eigen::MatrixXd g = -2.0 * (x.middleCols(begin, len).transpose() * x);
    g.colwise() += sq.segment(begin, len);
    g.rowwise() += sq.transpose();
    std::vector<KnnEdge> out;
    std::vector<double> row;
    std::vector<std::pair<double, std::size_t>> cand;
    for (Eigen::Index r = 0; r < len; ++r) {
      const auto i = static_cast<std::size_t>(begin + r);
      row.resize(static_cast<std::size_t>(n));
      for (Eigen::Index j = 0; j < n; ++j) row[static_cast<std::size_t>(j)] = g(r, j);
      row[i] = std::numeric_limits<double>::infinity();
      std::vector<double> sorted = row;
      std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(k - 1), sorted.end());
      const double cut = sorted[k - 1] + slack;
      cand.clear();
      for (std::size_t j = 0; j < row.size(); ++j) {
        if (j != i && row[j] <= cut) cand.emplace_back(squared_distance(records[i].vector, records[j].vector), j);
      }
      std::sort(cand.begin(), cand.end(), [&](const auto& a, const auto& b) {
        return a.first < b.first || (a.first == b.first && rank[a.second] < rank[b.second]);
      });
      for (std::size_t t = 0; t < k; ++t) out.push_back({i, cand[t].second, cand[t].first});
    }
    return out;
  });
  std::vector<KnnEdge> edges;
  edges.reserve(records.size() * k);
  for (auto& r : rows) edges.insert(edges.end(), r.begin(), r.end());
  return edges;
}

// ----------------------------------------------------------- histogram

// Bin 0 is [0, edges[0]); bin i in 1..B-1 is [edges[i-1], edges[i]); the last
// bin is [edges.back(), inf). Interior edges are log-spaced.
struct DistanceHistogram {
  std::vector<double> edges;
  std::vector<std::size_t> counts;  // edges.size() + 1 bins

  std::size_t total() const { return std::accumulate(counts.begin(), counts.end(), std::size_t{0}); }
  double lower(std::size_t bin) const { return bin == 0 ? 0.0 : edges[bin - 1]; }
  double upper(std::size_t bin) const {
    return bin < edges.size() ? edges[bin] : std::numeric_limits<double>::infinity();
  }
};

inline std::vector<double> log_spaced_edges(double lo, double hi, int bins_per_decade) {
  if (!(lo > 0.0 && hi > lo) || bins_per_decade < 1) throw ArgumentError("invalid histogram range");
  std::vector<double> edges;
  const double step = 1.0 / bins_per_decade;
  const double top = std::log10(hi);
  for (int i = 0;; ++i) {
    const double e = std::log10(lo) + i * step;
    if (e > top + 1e-12) break;
    edges.push_back(std::pow(10.0, e));
  }
  return edges;
}

inline DistanceHistogram histogram_of(std::span<const double> distances, double lo = 1e-6,
                                      double hi = 4.0, int bins_per_decade = 4) {
  DistanceHistogram h;
  h.edges = log_spaced_edges(lo, hi, bins_per_decade);
  h.counts.assign(h.edges.size() + 1, 0);
  for (double d : distances) {
    const auto bin = static_cast<std::size_t>(std::upper_bound(h.edges.begin(), h.edges.end(), d) - h.edges.begin());
    ++h.counts[bin];
  }
  return h;
}

// Nearest-neighbour distance of every record.
inline std::vector<double> nn_distances(std::span<const DescriptorRecord> records) {
  const auto edges = knn_graph(records, 1);
  std::vector<double> d(records.size());
  for (const auto& e : edges) d[e.source] = e.distance;
  return d;
}

// Histogram of 1-NN distances; counts sum to the corpus size.
inline DistanceHistogram nn_histogram(std::span<const DescriptorRecord> records, double lo = 1e-6,
                                      double hi = 4.0, int bins_per_decade = 4) {
  const auto d = nn_distances(records);
  return histogram_of(d, lo, hi, bins_per_decade);
}

// Threshold in the valley left of the main mode: walk down the left flank
// of the mode to the first local minimum and return the geometric middle of
// the run of bins holding that minimum. A flank that never rises again has no
// duplicate mass; the threshold is then the upper edge of bin 0.
inline double histogram_valley_threshold(const DistanceHistogram& h) {
  const auto mode = static_cast<std::size_t>(std::max_element(h.counts.begin(), h.counts.end()) - h.counts.begin());
  if (mode < 2) return h.upper(0);
  std::size_t b = mode - 1;
  while (b > 1 && h.counts[b - 1] <= h.counts[b]) --b;
  if (b == 1 && h.counts[0] <= h.counts[1]) return h.upper(0);
  std::size_t e = b;
  while (e + 1 < mode && h.counts[e + 1] == h.counts[b]) ++e;
  return std::sqrt(h.lower(b) * h.upper(e));
}

// ---------------------------------------------------------- components

class UnionFind {
 public:
  explicit UnionFind(std::size_t n) : parent_(n), size_(n, 1) { std::iota(parent_.begin(), parent_.end(), std::size_t{0}); }

  std::size_t find(std::size_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }

  bool unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    if (size_[a] < size_[b]) std::swap(a, b);
    parent_[b] = a;
    size_[a] += size_[b];
    return true;
  }

 private:
  std::vector<std::size_t> parent_, size_;
};

struct DupGroups {
  std::vector<std::vector<std::string>> components;  // ids sorted, groups ordered by representative
  std::vector<std::string> representatives;           // smallest id of each component
  double edge_threshold = 0.0;

  std::size_t group_count() const { return components.size(); }
  std::size_t image_count() const {
    std::size_t n = 0;
    for (const auto& c : components) n += c.size();
    return n;
  }
};

// Connected components of the graph restricted to edges with distance <=
// threshold. Every record appears in exactly one component.
inline DupGroups components(std::span<const DescriptorRecord> records, std::span<const KnnEdge> edges,
                            double threshold) {
  UnionFind uf(records.size());
  for (const auto& e : edges) {
    if (e.source >= records.size() || e.target >= records.size()) throw ArgumentError("edge index out of range");
    if (e.distance <= threshold) uf.unite(e.source, e.target);
  }
  std::vector<std::vector<std::string>> by_root(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) by_root[uf.find(i)].push_back(records[i].id);
  DupGroups g;
  g.edge_threshold = threshold;
  for (auto& c : by_root) {
    if (c.empty()) continue;
    std::sort(c.begin(), c.end());
    g.components.push_back(std::move(c));
  }
  std::sort(g.components.begin(), g.components.end(),
            [](const auto& a, const auto& b) { return a.front() < b.front(); });
  for (const auto& c : g.components) g.representatives.push_back(c.front());
  return g;
}

// CSV rows: id,group_id,is_representative (group ids follow component order).
inline void write_groups_csv(const DupGroups& g, std::ostream& out) {
  out << "id,group_id,is_representative\n";
  for (std::size_t k = 0; k < g.components.size(); ++k) {
    for (const auto& id : g.components[k]) {
      out << id << ',' << k << ',' << (id == g.representatives[k] ? 1 : 0) << '\n';
    }
  }
}

// ------------------------------------------------------ descriptor files

// Layout: "MADESC01", uint32 dim, uint64 count, then per record uint32 id
// length, id bytes, dim float32 values. All integers and floats little-endian.
inline constexpr char kDescriptorMagic[8] = {'M', 'A', 'D', 'E', 'S', 'C', '0', '1'};

namespace detail {

template <typename T>
void write_le(std::ostream& out, T v) {
  static_assert(std::is_trivially_copyable_v<T>);
  unsigned char bytes[sizeof(T)];
  std::memcpy(bytes, &v, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  out.write(reinterpret_cast<const char*>(bytes), sizeof(T));
}

template <typename T>
T read_le(std::istream& in) {
  unsigned char bytes[sizeof(T)];
  if (!in.read(reinterpret_cast<char*>(bytes), sizeof(T))) throw InputError("truncated descriptor file");
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  T v;
  std::memcpy(&v, bytes, sizeof(T));
  return v;
}

}  // namespace detail

inline void write_descriptors(std::span<const DescriptorRecord> records, std::ostream& out) {
  detail::check_records(records);
  const auto dim = static_cast<std::uint32_t>(records.empty() ? kDescriptorDim : records.front().vector.size());
  out.write(kDescriptorMagic, sizeof(kDescriptorMagic));
  detail::write_le<std::uint32_t>(out, dim);
  detail::write_le<std::uint64_t>(out, records.size());
  for (const auto& r : records) {
    detail::write_le<std::uint32_t>(out, static_cast<std::uint32_t>(r.id.size()));
    out.write(r.id.data(), static_cast<std::streamsize>(r.id.size()));
    for (float v : r.vector) detail::write_le<float>(out, v);
  }
  if (!out) throw Error("failed to write descriptor file");
}

inline void write_descriptors(std::span<const DescriptorRecord> records, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  write_descriptors(records, out);
}

inline std::vector<DescriptorRecord> read_descriptors(std::istream& in) {
  char magic[sizeof(kDescriptorMagic)];
  if (!in.read(magic, sizeof(magic)) || std::memcmp(magic, kDescriptorMagic, sizeof(magic)) != 0) {
    throw InputError("not a descriptor file");
  }
  const auto dim = detail::read_le<std::uint32_t>(in);
  const auto count = detail::read_le<std::uint64_t>(in);
  if (dim == 0) throw InputError("descriptor dimension is zero");
  std::vector<DescriptorRecord> records;
  records.reserve(static_cast<std::size_t>(std::min<std::uint64_t>(count, 1u << 20)));
  for (std::uint64_t i = 0; i < count; ++i) {
    DescriptorRecord r;
    r.id.resize(detail::read_le<std::uint32_t>(in));
    if (!in.read(r.id.data(), static_cast<std::streamsize>(r.id.size()))) throw InputError("truncated descriptor file");
    r.vector.resize(dim);
    for (auto& v : r.vector) v = detail::read_le<float>(in);
    records.push_back(std::move(r));
  }
  return records;
}

inline std::vector<DescriptorRecord> read_descriptors(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open '" + path + "'");
  return read_descriptors(in);
}

// ------------------------------------------------- planted duplicates

struct PlantedCorpus {
  std::vector<LabeledImage> images;   // label = planted group index, -1 for singletons
  std::vector<std::vector<std::string>> groups;  // planted partition, ids sorted
};

// `size` smooth-noise images of which `groups` originals each get one to
// three near copies: the first is shifted circularly by one pixel, the
// others add uniform pixel noise of amplitude 0.01. All other images are
// independent.
inline PlantedCorpus make_planted_corpus(std::uint64_t seed, std::size_t size = 10'000,
                                         std::size_t groups = 1'000) {
  if (groups * 4 > size) throw ArgumentError("too many planted groups for the corpus size");
  std::mt19937_64 rng(mix_seed(seed, 0xD0B));
  std::vector<int> copies(groups);
  std::uniform_int_distribution<int> copy_count(1, 3);
  std::size_t planted = 0;
  for (auto& c : copies) planted += static_cast<std::size_t>(c = copy_count(rng)) + 1;

  SmoothNoisePool pool(mix_seed(seed, 0xD0C), size - planted + groups);
  PlantedCorpus corpus;
  std::size_t source = 0;
  auto id_of = [](std::size_t i) {
    std::string s = std::to_string(i);
    return "img" + std::string(6 - std::min<std::size_t>(6, s.size()), '0') + s;
  };
  std::vector<LabeledImage> all;
  std::uniform_int_distribution<int> dir(0, 3);
  std::uniform_real_distribution<float> noise(-0.01f, 0.01f);
  for (std::size_t g = 0; g < groups; ++g) {
    const Image original = pool[source++];
    all.push_back({original, static_cast<int>(g), ""});
    static constexpr int kDx[4] = {1, -1, 0, 0}, kDy[4] = {0, 0, 1, -1};
    const int d = dir(rng);
    all.push_back({circular_view(original, false, kDx[d], kDy[d]), static_cast<int>(g), ""});
    for (int c = 1; c < copies[g]; ++c) {
      Image copy = original;
      for (auto& v : copy.data()) v = std::clamp(v + noise(rng), 0.0f, 1.0f);
      all.push_back({std::move(copy), static_cast<int>(g), ""});
    }
  }
  while (all.size() < size) all.push_back({pool[source++], -1, ""});
  std::shuffle(all.begin(), all.end(), rng);
  corpus.groups.assign(groups, {});
  for (std::size_t i = 0; i < all.size(); ++i) {
    all[i].id = id_of(i);
    if (all[i].label >= 0) corpus.groups[static_cast<std::size_t>(all[i].label)].push_back(all[i].id);
  }
  for (auto& g : corpus.groups) std::sort(g.begin(), g.end());
  corpus.images = std::move(all);
  return corpus;
}

inline std::vector<DescriptorRecord> describe_all(std::span<const LabeledImage> images) {
  std::vector<DescriptorRecord> out;
  out.reserve(images.size());
  for (const auto& im : images) out.push_back(describe(im.image, im.id));
  return out;
}

}  // namespace memaudit
