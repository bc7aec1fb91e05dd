#pragma once

#include <algorithm>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

namespace atpo {

using Index = std::uint32_t;

struct Entry {
  Index col;
  double prob;
};

/// Rows of a conditional probability table, grouped in blocks
/// (one block per action). Row (block, row) is a distribution over columns.
///
/// Small tables are stored dense; above the caller's state-count threshold
/// each row keeps only its nonzero entries, sorted by column.
class ProbabilityTable {
 public:
  enum class Layout { dense, sparse };

  class RowView {
   public:
    RowView() = default;
    RowView(std::span<const double> dense) : dense_(dense), is_dense_(true) {}
    RowView(std::span<const Entry> sparse) : sparse_(sparse), is_dense_(false) {}

    /// Calls f(col, prob) for every nonzero entry in column order.
    template <class F>
    void for_each(F&& f) const {
      if (is_dense_) {
        for (std::size_t j = 0; j < dense_.size(); ++j)
          if (dense_[j] != 0.0) f(static_cast<Index>(j), dense_[j]);
      } else {
        for (const Entry& e : sparse_) f(e.col, e.prob);
      }
    }

    double at(Index col) const {
      if (is_dense_) return col < dense_.size() ? dense_[col] : 0.0;
      auto it = std::lower_bound(sparse_.begin(), sparse_.end(), col,
                                 [](const Entry& e, Index c) { return e.col < c; });
      return (it != sparse_.end() && it->col == col) ? it->prob : 0.0;
    }

    double sum() const {
      double s = 0.0;
      for_each([&](Index, double p) { s += p; });
      return s;
    }

    std::size_t nonzeros() const {
      std::size_t n = 0;
      for_each([&](Index, double) { ++n; });
      return n;
    }

   private:
    std::span<const double> dense_;
    std::span<const Entry> sparse_;
    bool is_dense_ = false;
  };

  ProbabilityTable() = default;

  /// `rows` holds blocks*num_rows entry lists, row-major by block. Duplicate
  /// columns are summed and exact zeros dropped; negative entries are kept so
  /// validation can report them.
  ProbabilityTable(std::size_t blocks, std::size_t num_rows, std::size_t num_cols,
                   std::vector<std::vector<Entry>> rows, Layout layout)
      : blocks_(blocks), rows_(num_rows), cols_(num_cols), layout_(layout) {
    if (rows.size() != blocks * num_rows)
      throw std::invalid_argument("ProbabilityTable: row count mismatch");
    if (layout == Layout::dense) {
      dense_.assign(blocks * num_rows * num_cols, 0.0);
      for (std::size_t r = 0; r < rows.size(); ++r)
        for (const Entry& e : rows[r]) {
          if (e.col >= num_cols) throw std::out_of_range("ProbabilityTable: column out of range");
          dense_[r * num_cols + e.col] += e.prob;
        }
    } else {
      offsets_.reserve(rows.size() + 1);
      offsets_.push_back(0);
      for (auto& row : rows) {
        std::sort(row.begin(), row.end(), [](const Entry& a, const Entry& b) { return a.col < b.col; });
        std::size_t start = entries_.size();
        for (const Entry& e : row) {
          if (e.col >= num_cols) throw std::out_of_range("ProbabilityTable: column out of range");
          if (entries_.size() > start && entries_.back().col == e.col)
            entries_.back().prob += e.prob;
          else
            entries_.push_back(e);
        }
        entries_.erase(std::remove_if(entries_.begin() + static_cast<std::ptrdiff_t>(start), entries_.end(),
                                      [](const Entry& e) { return e.prob == 0.0; }),
                       entries_.end());
        offsets_.push_back(entries_.size());
        row.clear();
        row.shrink_to_fit();
      }
    }
  }

  std::size_t blocks() const { return blocks_; }
  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  Layout layout() const { return layout_; }

  RowView row(std::size_t block, std::size_t r) const {
    const std::size_t flat = block * rows_ + r;
    if (layout_ == Layout::dense)
      return RowView(std::span<const double>(dense_.data() + flat * cols_, cols_));
    return RowView(std::span<const Entry>(entries_.data() + offsets_[flat], offsets_[flat + 1] - offsets_[flat]));
  }

 private:
  std::size_t blocks_ = 0;
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  Layout layout_ = Layout::dense;
  std::vector<double> dense_;
  std::vector<Entry> entries_;
  std::vector<std::size_t> offsets_;
};

}  // namespace atpo
