#ifndef CFENT_MATRIX_EXPONENTIAL_HPP
#define CFENT_MATRIX_EXPONENTIAL_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>

#include <Eigen/Dense>

namespace cfent {

namespace detail {

template <typename Matrix>
double one_norm(const Matrix& m)
{
    return m.cwiseAbs().colwise().sum().maxCoeff();
}

// Diagonal Pade approximants r_m(A) = (V - U)^{-1} (V + U), with U odd and V
// even in A. Coefficients and switching thresholds follow Higham (2005).
template <typename Matrix>
void pade3(const Matrix& a, Matrix& u, Matrix& v)
{
    constexpr std::array<double, 4> b{120.0, 60.0, 12.0, 1.0};
    const Matrix id = Matrix::Identity(a.rows(), a.cols());
    const Matrix a2 = a * a;
    u = a * (b[3] * a2 + b[1] * id);
    v = b[2] * a2 + b[0] * id;
}

template <typename Matrix>
void pade5(const Matrix& a, Matrix& u, Matrix& v)
{
    constexpr std::array<double, 6> b{30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0};
    const Matrix id = Matrix::Identity(a.rows(), a.cols());
    const Matrix a2 = a * a;
    const Matrix a4 = a2 * a2;
    u = a * (b[5] * a4 + b[3] * a2 + b[1] * id);
    v = b[4] * a4 + b[2] * a2 + b[0] * id;
}

template <typename Matrix>
void pade7(const Matrix& a, Matrix& u, Matrix& v)
{
    constexpr std::array<double, 8> b{17297280.0, 8648640.0, 1995840.0, 277200.0,
                                      25200.0,    1512.0,    56.0,      1.0};
    const Matrix id = Matrix::Identity(a.rows(), a.cols());
    const Matrix a2 = a * a;
    const Matrix a4 = a2 * a2;
    const Matrix a6 = a4 * a2;
    u = a * (b[7] * a6 + b[5] * a4 + b[3] * a2 + b[1] * id);
    v = b[6] * a6 + b[4] * a4 + b[2] * a2 + b[0] * id;
}

template <typename Matrix>
void pade9(const Matrix& a, Matrix& u, Matrix& v)
{
    constexpr std::array<double, 10> b{17643225600.0, 8821612800.0, 2075673600.0, 302702400.0,
                                       30270240.0,    2162160.0,    110880.0,     3960.0,
                                       90.0,          1.0};
    const Matrix id = Matrix::Identity(a.rows(), a.cols());
    const Matrix a2 = a * a;
    const Matrix a4 = a2 * a2;
    const Matrix a6 = a4 * a2;
    const Matrix a8 = a6 * a2;
    u = a * (b[9] * a8 + b[7] * a6 + b[5] * a4 + b[3] * a2 + b[1] * id);
    v = b[8] * a8 + b[6] * a6 + b[4] * a4 + b[2] * a2 + b[0] * id;
}

template <typename Matrix>
void pade13(const Matrix& a, Matrix& u, Matrix& v)
{
    constexpr std::array<double, 14> b{
        64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
        1187353796428800.0,  129060195264000.0,   10559470521600.0,
        670442572800.0,      33522128640.0,       1323241920.0,
        40840800.0,          960960.0,            16380.0,
        182.0,               1.0};
    const Matrix id = Matrix::Identity(a.rows(), a.cols());
    const Matrix a2 = a * a;
    const Matrix a4 = a2 * a2;
    const Matrix a6 = a4 * a2;
    const Matrix inner_u = a6 * (b[13] * a6 + b[11] * a4 + b[9] * a2);
    u = a * (inner_u + b[7] * a6 + b[5] * a4 + b[3] * a2 + b[1] * id);
    const Matrix inner_v = a6 * (b[12] * a6 + b[10] * a4 + b[8] * a2);
    v = inner_v + b[6] * a6 + b[4] * a4 + b[2] * a2 + b[0] * id;
}

}  // namespace detail

/// Matrix exponential by scaling and squaring with a diagonal Pade
/// approximant of degree 3, 5, 7, 9 or 13 chosen from the 1-norm.
///
/// Non-finite input throws std::domain_error.
template <typename Derived>
typename Derived::PlainObject expm(const Eigen::MatrixBase<Derived>& input)
{
    using Matrix = typename Derived::PlainObject;
    if (input.rows() != input.cols()) {
        throw std::invalid_argument("expm: matrix must be square");
    }
    if (!input.allFinite()) {
        throw std::domain_error("expm: matrix has non-finite entries");
    }

    Matrix a = input;
    const double norm = detail::one_norm(a);

    Matrix u(a.rows(), a.cols());
    Matrix v(a.rows(), a.cols());
    int squarings = 0;
    if (norm <= 1.495585217958292e-2) {
        detail::pade3(a, u, v);
    } else if (norm <= 2.539398330063230e-1) {
        detail::pade5(a, u, v);
    } else if (norm <= 9.504178996162932e-1) {
        detail::pade7(a, u, v);
    } else if (norm <= 2.097847961257068e0) {
        detail::pade9(a, u, v);
    } else {
        constexpr double theta13 = 5.371920351148152e0;
        squarings = std::max(0, static_cast<int>(std::ceil(std::log2(norm / theta13))));
        a /= std::ldexp(1.0, squarings);
        detail::pade13(a, u, v);
    }

    const Matrix numerator = v + u;
    const Matrix denominator = v - u;
    Matrix result = denominator.partialPivLu().solve(numerator);
    for (int i = 0; i < squarings; ++i) {
        result = (result * result).eval();
    }
    return result;
}

}  // namespace cfent

#endif
