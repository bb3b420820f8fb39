#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace tsfc::stats {

/// Accuracy of k methods on N datasets, row-major N x k.
class ResultsTable {
 public:
  ResultsTable() = default;
  /// lengths is either empty or one series length per dataset.
  ResultsTable(std::vector<std::string> datasets, std::vector<std::string> methods,
               std::vector<double> accuracies, std::vector<std::size_t> lengths = {});

  std::size_t datasets_count() const noexcept { return datasets_.size(); }
  std::size_t methods_count() const noexcept { return methods_.size(); }
  const std::vector<std::string>& datasets() const noexcept { return datasets_; }
  const std::vector<std::string>& methods() const noexcept { return methods_; }
  const std::vector<std::size_t>& lengths() const noexcept { return lengths_; }
  bool has_lengths() const noexcept { return !lengths_.empty(); }
  double at(std::size_t dataset, std::size_t method) const { return acc_[dataset * methods_.size() + method]; }
  std::span<const double> row(std::size_t dataset) const {
    return {acc_.data() + dataset * methods_.size(), methods_.size()};
  }
  std::vector<double> column(std::size_t method) const;
  std::vector<double> mean_accuracy() const;

  ResultsTable subset(std::span<const std::size_t> rows) const;

  /// Header "dataset[,length],<methods...>", one line per dataset.
  std::string to_csv() const;
  static ResultsTable from_csv(std::string_view text);

  bool operator==(const ResultsTable&) const = default;

 private:
  std::vector<std::string> datasets_;
  std::vector<std::string> methods_;
  std::vector<double> acc_;
  std::vector<std::size_t> lengths_;
};

/// Ranks of one row, rank 1 = highest value, ties share the mean rank.
std::vector<double> rank_row(std::span<const double> values);

std::vector<double> average_ranks(const ResultsTable& table);

struct FriedmanResult {
  double statistic = 0.0;
  double p_value = 1.0;
};

/// Tie-corrected Friedman chi-square with k-1 degrees of freedom.
FriedmanResult friedman_test(const ResultsTable& table);

/// Upper tail of the chi-square distribution.
double chi_square_sf(double x, double df);

/// Studentized range quantile divided by sqrt(2), for 2 <= k <= 20 and
/// alpha in {0.05, 0.10}.
double nemenyi_q(std::size_t k, double alpha);

/// q_alpha(k) * sqrt(k(k+1) / (6N)).
double nemenyi_cd(std::size_t k, std::size_t n_datasets, double alpha = 0.05);

/// Exact enumeration is used up to this many non-zero differences.
inline constexpr std::size_t kExactWilcoxonLimit = 25;

/// Two-sided signed-rank p-value of a - b. Zero differences are dropped.
double wilcoxon_signed_rank(std::span<const double> a, std::span<const double> b);

/// Holm step-down adjustment, returned in the input order.
std::vector<double> holm_adjust(std::span<const double> p_values);

struct SignificanceMatrix {
  std::size_t k = 0;
  std::vector<char> same;          // k x k; 1 = no significant difference
  std::vector<double> adjusted_p;  // k x k; diagonal 1

  bool no_difference(std::size_t i, std::size_t j) const { return same[i * k + j] != 0; }
  double p(std::size_t i, std::size_t j) const { return adjusted_p[i * k + j]; }
};

SignificanceMatrix pairwise_matrix(const ResultsTable& table, double alpha = 0.05);

struct CdDiagram {
  std::vector<std::string> methods;  // sorted by average rank, best first
  std::vector<double> ranks;
  std::vector<double> mean_accuracy;
  double cd = 0.0;
  double alpha = 0.05;
  std::size_t n_datasets = 0;
  /// Maximal runs [first, last] of sorted positions whose rank spread is below cd.
  std::vector<std::pair<std::size_t, std::size_t>> cliques;
};

CdDiagram cd_diagram(const ResultsTable& table, double alpha = 0.05);

/// Maximal runs of a sorted rank vector with spread strictly below cd.
std::vector<std::pair<std::size_t, std::size_t>> cliques(std::span<const double> sorted_ranks, double cd);

std::string render_svg(const CdDiagram& diagram);
std::string render_svg(const SignificanceMatrix& matrix, std::span<const std::string> methods);

inline constexpr std::size_t kDefaultThresholdValues[] = {315, 720};
inline constexpr std::span<const std::size_t> kDefaultThresholds{kDefaultThresholdValues};

struct Stratum {
  std::string label;                  // "<315", ">315", ">720"
  std::optional<ResultsTable> table;  // empty when no dataset qualifies
};

/// Strict inequalities: "<t0" then ">t" for every threshold.
std::vector<Stratum> stratify_by_length(const ResultsTable& table,
                                        std::span<const std::size_t> thresholds = kDefaultThresholds);

}  // namespace tsfc::stats
