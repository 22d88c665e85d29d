#include <doctest.h>

#include "jamids/errors.hpp"
#include "jamids/ksvm.hpp"
#include "jamids/random.hpp"
#include "../checks.hpp"

using namespace jamids;

namespace {

using checks::separable;
using Problem = checks::SvmProblem;

double dual_objective(const Problem& p, const Kernel& k, const Eigen::VectorXd& alpha) {
    // The maximization form: sum a - 1/2 sum_ij a_i a_j y_i y_j k(x_i, x_j)
    double quad = 0.0;
    for (Eigen::Index i = 0; i < alpha.size(); ++i)
        for (Eigen::Index j = 0; j < alpha.size(); ++j)
            quad += alpha[i] * alpha[j] * p.y[i] * p.y[j] * kernel_eval(k, p.X.row(i), p.X.row(j));
    return alpha.sum() - 0.5 * quad;
}

}  // namespace

TEST_SUITE("ksvm") {

TEST_CASE("kernel values") {
    const Kernel rbf{KernelKind::Rbf, 0.7}, lin{KernelKind::Linear, 1.0};
    CHECK(kernel_eval(lin, Eigen::Vector2d(1, 2), Eigen::Vector2d(3, 4)) == 11.0);
    Rng rng(1);
    for (int t = 0; t < 100; ++t) {
        Eigen::VectorXd x(5), z(5);
        for (int j = 0; j < 5; ++j) {
            x[j] = rng.normal();
            z[j] = rng.normal();
        }
        CHECK(kernel_eval(rbf, x, x) == 1.0);
        CHECK(std::abs(kernel_eval(rbf, x, z) - kernel_eval(rbf, z, x)) < 1e-12);
        CHECK(kernel_eval(lin, x, z) == doctest::Approx(x.dot(z)).epsilon(1e-12));
    }
    CHECK_THROWS_AS(kernel_eval(rbf, Eigen::Vector2d(1, 2), Eigen::Vector3d(1, 2, 3)), ShapeError);
}

TEST_CASE("two-point toy has the analytic solution") {
    Eigen::MatrixXd X(2, 1);
    X << 0.0, 2.0;
    Eigen::VectorXd y(2);
    y << -1.0, 1.0;
    SmoOptions o;
    o.C = 10.0;
    o.kernel = {KernelKind::Linear, 1.0};
    o.tol = 1e-8;
    auto m = train_smo(X, y, o);
    REQUIRE(m.num_support_vectors() == 2);
    CHECK(m.alphas[0] == doctest::Approx(0.5).epsilon(1e-6));
    CHECK(m.alphas[1] == doctest::Approx(0.5).epsilon(1e-6));
    CHECK(std::abs(m.bias + 1.0) < 1e-6);
    CHECK(std::abs(decision(m, Eigen::VectorXd::Constant(1, 1.0))) < 1e-6);
    CHECK(decision(m, Eigen::VectorXd::Constant(1, 2.0)) == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(m.converged);
}

TEST_CASE("binary verdict: decision >= 0 is an attack") {
    CHECK(binary_from_decision(0.7) == BinaryVerdict::Attack);
    CHECK(binary_from_decision(-0.7) == BinaryVerdict::Normal);
    CHECK(binary_from_decision(0.0) == BinaryVerdict::Attack);
}

TEST_CASE("KKT residuals and equality constraint on random separable sets") {
    for (std::uint64_t seed = 1; seed <= 50; ++seed) {
        const auto p = separable(20, seed);
        for (auto kind : {KernelKind::Linear, KernelKind::Rbf}) {
            SmoOptions o;
            o.C = 10.0;
            o.kernel = {kind, 0.5};
            o.tol = 1e-3;
            o.seed = seed;
            auto m = train_smo(p.X, p.y, o);
            CAPTURE(seed);
            CAPTURE(to_string(kind));
            CHECK(m.converged);
            CHECK(checks::kkt_violation(m, p) <= 1e-3);
            CHECK(std::abs(m.alphas.dot(m.sv_labels)) < 1e-8);
            CHECK((m.alphas.array() > 0.0).all());
            CHECK((m.alphas.array() <= m.C).all());
        }
    }
}

TEST_CASE("decision values match the projected-gradient dual oracle") {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const auto p = separable(20, 100 + seed);
        for (auto kind : {KernelKind::Linear, KernelKind::Rbf}) {
            const Kernel k{kind, 0.5};
            SmoOptions o;
            o.C = 10.0;
            o.kernel = k;
            o.tol = 1e-6;
            auto m = train_smo(p.X, p.y, o);
            REQUIRE(m.converged);

            const double worst = checks::oracle_decision_gap(m, p, 10.0, 20, seed);
            CAPTURE(seed);
            CAPTURE(to_string(kind));
            CHECK(worst < 1e-3);
        }
    }
}

TEST_CASE("dual objective improves after every pair update") {
    const auto p = separable(30, 7);
    const Kernel k{KernelKind::Rbf, 0.5};
    std::vector<double> trace;
    SmoOptions o;
    o.C = 1.0;
    o.kernel = k;
    o.tol = 1e-6;
    o.observer = [&](const Eigen::VectorXd& a) {
        trace.push_back(dual_objective(p, k, a));
        CHECK(std::abs(a.dot(p.y)) < 1e-8);
    };
    train_smo(p.X, p.y, o);
    REQUIRE(trace.size() > 2);
    for (std::size_t i = 1; i < trace.size(); ++i) CHECK(trace[i] >= trace[i - 1] - 1e-12);
}

TEST_CASE("predictions are invariant under training row permutation") {
    Rng rng(3);
    Problem p{Eigen::MatrixXd(60, 3), Eigen::VectorXd(60)};
    for (int i = 0; i < 60; ++i) {
        for (int j = 0; j < 3; ++j) p.X(i, j) = rng.normal();
        p.y[i] = p.X.row(i).squaredNorm() > 2.5 ? 1.0 : -1.0;  // not linearly separable
    }
    Eigen::PermutationMatrix<Eigen::Dynamic> perm(60);
    perm.setIdentity();
    rng.shuffle(perm.indices().data(), perm.indices().data() + 60);
    SmoOptions o;
    o.kernel = {KernelKind::Rbf, 0.5};
    o.tol = 1e-6;
    auto a = train_smo(p.X, p.y, o);
    auto b = train_smo(perm * p.X, perm * p.y, o);
    for (int t = 0; t < 100; ++t) {
        Eigen::Vector3d x(rng.normal(), rng.normal(), rng.normal());
        const double da = decision(a, x), db = decision(b, x);
        CHECK(std::abs(da - db) < 1e-4);
        if (std::abs(da) > 1e-3) CHECK(predict_binary(a, x) == predict_binary(b, x));
    }
}

TEST_CASE("cache size does not change the result") {
    const auto p = separable(40, 9);
    SmoOptions o;
    o.kernel = {KernelKind::Rbf, 1.0};
    o.cache_mb = 256.0;
    auto big = train_smo(p.X, p.y, o);
    o.cache_mb = 0.0;
    auto tiny = train_smo(p.X, p.y, o);
    CHECK(big == tiny);
}

TEST_CASE("iteration budget exhaustion flags the model") {
    Rng rng(5);
    Problem p{Eigen::MatrixXd(200, 2), Eigen::VectorXd(200)};
    for (int i = 0; i < 200; ++i) {
        p.X(i, 0) = rng.normal();
        p.X(i, 1) = rng.normal();
        p.y[i] = rng.uniform() < 0.5 ? 1.0 : -1.0;
    }
    SmoOptions o;
    o.C = 100.0;
    o.kernel = {KernelKind::Rbf, 5.0};
    o.tol = 1e-9;
    o.max_passes = 1;
    auto m = train_smo(p.X, p.y, o);
    CHECK_FALSE(m.converged);
    CHECK(m.iterations <= 200);
    CHECK(m.num_support_vectors() > 0);
}

TEST_CASE("training errors") {
    Eigen::MatrixXd X(3, 2);
    X << 0, 0, 1, 1, 2, 2;
    Eigen::VectorXd same = Eigen::VectorXd::Ones(3);
    CHECK_THROWS_AS(train_smo(X, same, {}), SingleClassError);
    Eigen::VectorXd y(3);
    y << -1, 1, 1;
    SmoOptions bad;
    bad.C = 0.0;
    CHECK_THROWS_AS(train_smo(X, y, bad), ConfigError);
    Eigen::VectorXd odd(3);
    odd << -1, 2, 1;
    CHECK_THROWS_AS(train_smo(X, odd, {}), ConfigError);
    auto m = train_smo(X, y, {});
    CHECK_THROWS_AS(decision(m, Eigen::Vector3d(1, 2, 3)), ShapeError);
    CHECK_THROWS_AS(predict_binary(m, Eigen::Vector3d(1, 2, 3)), ShapeError);
}

}  // TEST_SUITE
