#pragma once

// Dense semidefinite programming over block-diagonal PSD cones with linear
// equality constraints and native free variables. Linear programs are the
// all-1x1-blocks special case. The embedded solver is a primal-dual
// path-following interior-point method with Nesterov-Todd scaling, run on a
// homogeneous self-dual embedding so infeasibility and unboundedness come
// with certificates instead of guesses. solve() is the only entry point, so
// an external conic solver can be substituted behind it without touching
// callers.

#include <iosfwd>
#include <vector>

#include "sosg/linalg.hpp"

namespace sosg {

enum class SdpStatus { Optimal, Infeasible, Unbounded, NumericalFailure };
enum class Sense { Minimize, Maximize };

struct SdpSettings {
    double feas_tol = 1e-8;
    double psd_tol = 1e-8;
    double gap_tol = 1e-7;
    int max_iter = 200;  // SOSG_MAX_ITER in the environment overrides this
    double unbounded_threshold = 1e8;
    long long var_cap = 5000;
    bool verbose = false;
};

class SdpProblem {
  public:
    Sense sense = Sense::Maximize;

    int add_free();
    int add_block(int side);  // side 1 means a nonnegative scalar

    void objective_free(int fv, double c);
    // Coefficient of the matrix entry X_ij; each unordered pair contributes
    // once (an off-diagonal term c means c * X_ij with X symmetric).
    void objective_entry(int blk, int i, int j, double c);

    int add_constraint(double rhs);
    void term_free(int row, int fv, double c);
    void term_entry(int row, int blk, int i, int j, double c);

    int free_count() const { return nf_; }
    const std::vector<int>& blocks() const { return sides_; }
    int constraint_count() const { return static_cast<int>(rows_.size()); }
    long long scalar_dimension() const;

    // Plain-text dump, one constraint per line: variable-id coefficient
    // pairs, then the right-hand side (for cross-checks against external
    // solvers).
    void dump(std::ostream& os) const;

    struct Term {
        int idx;
        double v;
    };
    struct Entry {
        int i, j;  // i >= j
        double v;
    };
    struct Chunk {
        int blk;  // index into psd block list
        std::vector<Entry> e;
    };
    struct Row {
        std::vector<Term> free_terms;
        std::vector<Term> scalar_terms;  // idx into scalar slots
        std::vector<Chunk> chunks;
        double rhs = 0.0;
    };

    const Row& objective_row() const { return obj_; }
    const std::vector<Row>& rows() const { return rows_; }
    int scalar_count() const { return static_cast<int>(scalar_of_block_.size()); }
    const std::vector<int>& psd_sides() const { return psd_sides_; }
    // Maps a public block id to (is_scalar, slot index).
    bool block_is_scalar(int blk) const { return slot_is_scalar_[blk]; }
    int block_slot(int blk) const { return slot_index_[blk]; }

  private:
    void add_entry(Row& row, int blk, int i, int j, double c);

    int nf_ = 0;
    std::vector<int> sides_;          // public block sides in creation order
    std::vector<bool> slot_is_scalar_;
    std::vector<int> slot_index_;
    std::vector<int> scalar_of_block_;  // scalar slot -> public block id
    std::vector<int> psd_of_block_;     // psd slot -> public block id
    std::vector<int> psd_sides_;
    Row obj_;
    std::vector<Row> rows_;
};

struct SdpSolution {
    SdpStatus status = SdpStatus::NumericalFailure;
    double objective = 0.0;           // in the problem's sense, when Optimal
    Vec free_values;                  // per free variable
    std::vector<Mat> block_values;    // per public block id
    Vec y;                            // equality multipliers
    std::vector<Mat> dual_blocks;     // dual slack per public block id
    int iterations = 0;
    double primal_residual = 0.0;
    double dual_residual = 0.0;
    double gap = 0.0;

    double block_scalar(int blk) const { return block_values[blk](0, 0); }
};

SdpSolution solve(const SdpProblem& prob, const SdpSettings& settings = {});

}  // namespace sosg
