// SIMD/scalar equivalence: every kernel in the table must agree between
// backends on random inputs, including awkward sizes around the vector width.

#include <doctest.h>

#include <cmath>
#include <vector>

#include "eaq/kernels.hpp"
#include "eaq/rng.hpp"

using namespace eaq;

namespace {

std::vector<double> random_vec(std::size_t n, Rng& rng, double lo = -2.0, double hi = 2.0) {
    std::uniform_real_distribution<double> dist(lo, hi);
    std::vector<double> v(n);
    for (double& x : v) x = dist(rng);
    return v;
}

void check_close(const std::vector<double>& a, const std::vector<double>& b, double tol = 1e-11) {
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double scale = std::max({1.0, std::abs(a[i]), std::abs(b[i])});
        REQUIRE(std::abs(a[i] - b[i]) <= tol * scale);
    }
}

const std::size_t kSizes[] = {1, 3, 4, 5, 7, 8, 16, 33, 127};

}  // namespace

TEST_CASE("kernel backend selection") {
    CHECK(std::string(kern::active().name) ==
          std::string(kern::backend_name(kern::backend())));
    if (!kern::avx2_available()) {
        CHECK(kern::backend() == kern::Backend::scalar);
        CHECK_THROWS(kern::use(kern::Backend::avx2));
    }
}

TEST_CASE("elementwise kernels agree across backends") {
    if (!kern::avx2_available()) return;
    const auto& sc = kern::table(kern::Backend::scalar);
    const auto& vx = kern::table(kern::Backend::avx2);
    Rng rng = make_rng(42);
    for (std::size_t n : kSizes) {
        auto x = random_vec(n, rng);
        auto y = random_vec(n, rng);

        auto y1 = y, y2 = y;
        sc.axpy(n, 1.7, x.data(), y1.data());
        vx.axpy(n, 1.7, x.data(), y2.data());
        check_close(y1, y2);

        auto s1 = x, s2 = x;
        sc.scal(n, -0.3, s1.data());
        vx.scal(n, -0.3, s2.data());
        check_close(s1, s2);

        std::vector<double> o1(n), o2(n);
        sc.add(n, x.data(), y.data(), o1.data());
        vx.add(n, x.data(), y.data(), o2.data());
        check_close(o1, o2);
        sc.sub(n, x.data(), y.data(), o1.data());
        vx.sub(n, x.data(), y.data(), o2.data());
        check_close(o1, o2);
        sc.mul(n, x.data(), y.data(), o1.data());
        vx.mul(n, x.data(), y.data(), o2.data());
        check_close(o1, o2);
        sc.lincomb(n, 0.8, x.data(), -1.2, y.data(), o1.data());
        vx.lincomb(n, 0.8, x.data(), -1.2, y.data(), o2.data());
        check_close(o1, o2);

        auto c1 = x, c2 = x;
        sc.clamp(n, -0.5, 0.5, c1.data());
        vx.clamp(n, -0.5, 0.5, c2.data());
        check_close(c1, c2);

        sc.fill(n, 3.25, o1.data());
        vx.fill(n, 3.25, o2.data());
        check_close(o1, o2);

        sc.relu(n, x.data(), o1.data());
        vx.relu(n, x.data(), o2.data());
        check_close(o1, o2);
        sc.relu_grad(n, x.data(), y.data(), o1.data());
        vx.relu_grad(n, x.data(), y.data(), o2.data());
        check_close(o1, o2);
        sc.silu(n, x.data(), o1.data());
        vx.silu(n, x.data(), o2.data());
        check_close(o1, o2);
        sc.silu_grad(n, x.data(), y.data(), o1.data());
        vx.silu_grad(n, x.data(), y.data(), o2.data());
        check_close(o1, o2);
    }
}

TEST_CASE("reduction kernels agree across backends") {
    if (!kern::avx2_available()) return;
    const auto& sc = kern::table(kern::Backend::scalar);
    const auto& vx = kern::table(kern::Backend::avx2);
    Rng rng = make_rng(7);
    for (std::size_t n : kSizes) {
        auto x = random_vec(n, rng);
        auto y = random_vec(n, rng);
        CHECK(sc.dot(n, x.data(), y.data()) ==
              doctest::Approx(vx.dot(n, x.data(), y.data())).epsilon(1e-12));
        CHECK(sc.sum(n, x.data()) == doctest::Approx(vx.sum(n, x.data())).epsilon(1e-12));
        CHECK(sc.vmax(n, x.data()) == vx.vmax(n, x.data()));  // exact: same comparisons
    }
}

TEST_CASE("matvec family agrees across backends") {
    if (!kern::avx2_available()) return;
    const auto& sc = kern::table(kern::Backend::scalar);
    const auto& vx = kern::table(kern::Backend::avx2);
    Rng rng = make_rng(99);
    for (std::size_t out_dim : {1u, 5u, 16u, 33u}) {
        for (std::size_t in_dim : {1u, 4u, 7u, 64u}) {
            auto w = random_vec(out_dim * in_dim, rng);
            auto x = random_vec(in_dim, rng);
            auto b = random_vec(out_dim, rng);
            auto dy = random_vec(out_dim, rng);
            std::vector<double> y1(out_dim), y2(out_dim);
            sc.matvec(out_dim, in_dim, w.data(), x.data(), b.data(), y1.data());
            vx.matvec(out_dim, in_dim, w.data(), x.data(), b.data(), y2.data());
            check_close(y1, y2);
            sc.matvec(out_dim, in_dim, w.data(), x.data(), nullptr, y1.data());
            vx.matvec(out_dim, in_dim, w.data(), x.data(), nullptr, y2.data());
            check_close(y1, y2);
            std::vector<double> dx1(in_dim), dx2(in_dim);
            sc.matvec_t(out_dim, in_dim, w.data(), dy.data(), dx1.data());
            vx.matvec_t(out_dim, in_dim, w.data(), dy.data(), dx2.data());
            check_close(dx1, dx2);
            auto g1 = random_vec(out_dim * in_dim, rng);
            auto g2 = g1;
            sc.ger(out_dim, in_dim, g1.data(), dy.data(), x.data());
            vx.ger(out_dim, in_dim, g2.data(), dy.data(), x.data());
            check_close(g1, g2);
        }
    }
}

TEST_CASE("conv1d kernels agree across backends") {
    if (!kern::avx2_available()) return;
    const auto& sc = kern::table(kern::Backend::scalar);
    const auto& vx = kern::table(kern::Backend::avx2);
    Rng rng = make_rng(5);
    for (int k : {1, 3, 5}) {
        for (int t : {1, 2, 5, 8, 20, 31}) {
            const int cin = 3, cout = 4;
            auto x = random_vec(static_cast<std::size_t>(cin) * t, rng);
            auto w = random_vec(static_cast<std::size_t>(cout) * cin * k, rng);
            auto b = random_vec(cout, rng);
            auto dy = random_vec(static_cast<std::size_t>(cout) * t, rng);

            std::vector<double> y1(static_cast<std::size_t>(cout) * t),
                y2(static_cast<std::size_t>(cout) * t);
            sc.conv1d(cin, cout, k, t, x.data(), w.data(), b.data(), y1.data());
            vx.conv1d(cin, cout, k, t, x.data(), w.data(), b.data(), y2.data());
            check_close(y1, y2);

            std::vector<double> dx1(static_cast<std::size_t>(cin) * t),
                dx2(static_cast<std::size_t>(cin) * t);
            sc.conv1d_grad_input(cin, cout, k, t, w.data(), dy.data(), dx1.data());
            vx.conv1d_grad_input(cin, cout, k, t, w.data(), dy.data(), dx2.data());
            check_close(dx1, dx2);

            auto dw1 = random_vec(w.size(), rng);
            auto dw2 = dw1;
            auto db1 = random_vec(cout, rng);
            auto db2 = db1;
            sc.conv1d_grad_params(cin, cout, k, t, x.data(), dy.data(), dw1.data(), db1.data());
            vx.conv1d_grad_params(cin, cout, k, t, x.data(), dy.data(), dw2.data(), db2.data());
            check_close(dw1, dw2);
            check_close(db1, db2);
        }
    }
}

TEST_CASE("adam kernel agrees across backends") {
    if (!kern::avx2_available()) return;
    const auto& sc = kern::table(kern::Backend::scalar);
    const auto& vx = kern::table(kern::Backend::avx2);
    Rng rng = make_rng(13);
    for (std::size_t n : kSizes) {
        auto p1 = random_vec(n, rng);
        auto p2 = p1;
        auto g = random_vec(n, rng);
        auto m1 = random_vec(n, rng, 0.0, 0.1);
        auto m2 = m1;
        auto v1 = random_vec(n, rng, 0.0, 0.1);
        auto v2 = v1;
        sc.adam_step(n, p1.data(), g.data(), m1.data(), v1.data(), 1e-3, 0.9, 0.999, 1e-8, 0.5,
                     0.25);
        vx.adam_step(n, p2.data(), g.data(), m2.data(), v2.data(), 1e-3, 0.9, 0.999, 1e-8, 0.5,
                     0.25);
        check_close(p1, p2);
        check_close(m1, m2);
        check_close(v1, v2);
    }
}

TEST_CASE("conv1d matches a direct correlation oracle") {
    // scalar backend vs an independent index-by-index evaluation
    const auto& sc = kern::table(kern::Backend::scalar);
    Rng rng = make_rng(21);
    const int cin = 2, cout = 3, k = 5, t = 9, pad = k / 2;
    auto x = random_vec(static_cast<std::size_t>(cin) * t, rng);
    auto w = random_vec(static_cast<std::size_t>(cout) * cin * k, rng);
    auto b = random_vec(cout, rng);
    std::vector<double> y(static_cast<std::size_t>(cout) * t);
    sc.conv1d(cin, cout, k, t, x.data(), w.data(), b.data(), y.data());
    for (int co = 0; co < cout; ++co) {
        for (int i = 0; i < t; ++i) {
            double want = b[co];
            for (int ci = 0; ci < cin; ++ci)
                for (int dk = 0; dk < k; ++dk) {
                    const int src = i + dk - pad;
                    if (src >= 0 && src < t)
                        want += w[(static_cast<std::size_t>(co) * cin + ci) * k + dk] *
                                x[static_cast<std::size_t>(ci) * t + src];
                }
            CHECK(y[static_cast<std::size_t>(co) * t + i] == doctest::Approx(want).epsilon(1e-12));
        }
    }
}
