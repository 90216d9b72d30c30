#pragma once

#include <array>
#include <iosfwd>
#include <string>
#include <vector>

namespace eqbase {

/// Symmetric 3x3 stress (change) tensor stored as its six independent components.
struct StressTensor3 {
    double xx = 0.0;
    double yy = 0.0;
    double zz = 0.0;
    double xy = 0.0;
    double xz = 0.0;
    double yz = 0.0;

    using Matrix = std::array<std::array<double, 3>, 3>;

    Matrix matrix() const;
    static StressTensor3 from_matrix(const Matrix& m);  ///< symmetrizes
    double trace() const { return xx + yy + zz; }
    StressTensor3 scaled(double k) const { return {k * xx, k * yy, k * zz, k * xy, k * xz, k * yz}; }
    bool operator==(const StressTensor3&) const = default;
};

/// Sum of absolute values of the six independent components.
double metric_A(const StressTensor3& s);

/// s - tr(s)/3 I.
StressTensor3 deviatoric(const StressTensor3& s);

/// sqrt(3 J2) of the deviatoric part, J2 = 1/2 s'_ij s'_ij.
double von_mises(const StressTensor3& s);

/// Same quantity written with the invariants of the deviatoric tensor,
/// sqrt(I1^2 - 3 I2). Kept as a second algebraic route.
double von_mises_invariants(const StressTensor3& s);

/// Eigenvalues sorted descending (sigma1 >= sigma2 >= sigma3). Closed-form
/// trigonometric solution; falls back to Jacobi rotations near repeated roots.
std::array<double, 3> principal_stresses(const StressTensor3& s);

/// Cyclic Jacobi eigenvalues, sorted descending.
std::array<double, 3> principal_stresses_jacobi(const StressTensor3& s);

/// (sigma1 - sigma3) / 2.
double max_shear(const StressTensor3& s);

/// |xx|, |xy|, |xz|, |yy|, |yz|, |zz| followed by their negatives.
std::array<double, 12> feature_vector_12(const StressTensor3& s);

/// Column names of feature_vector_12, in order.
const std::array<std::string, 12>& feature_names_12();

/// A tensor row with an optional class label (-1 when absent).
struct LabeledTensor {
    StressTensor3 tensor;
    int label = -1;
};

/// Tensor CSV: header `sxx,syy,szz,sxy,sxz,syz` with optional trailing `label`.
std::vector<LabeledTensor> read_tensor_csv(std::istream& is);
void write_tensor_csv(std::ostream& os, const std::vector<LabeledTensor>& rows);

/// Feature table CSV: the 12 feature columns then `label`.
void write_feature_csv(std::ostream& os, const std::vector<LabeledTensor>& rows);

}  // namespace eqbase
