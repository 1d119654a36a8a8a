#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <random>
#include <sstream>

#include "oracles.hpp"
#include "padic_ml/mahler.hpp"

using namespace padic_ml;

namespace {

ResidueGrid grid_1d(std::vector<Residue> values, std::uint64_t m = 1024) {
    const auto n = values.size();
    return ResidueGrid(1, n, m, std::move(values));
}

std::vector<Residue> as_vector(const ResidueGrid& g) { return {g.data().begin(), g.data().end()}; }

struct RandomGrid {
    std::uint32_t p;
    std::uint32_t e;
    std::uint64_t m;
    std::size_t dims;
    std::size_t extent;
    std::vector<Residue> values;
};

RandomGrid random_grid(std::mt19937_64& rng, std::size_t max_dims = 3) {
    RandomGrid g;
    g.p = rng() % 2 ? 2 : 3;
    g.e = 1 + rng() % 6;
    g.m = oracle::ipow(g.p, g.e);
    g.dims = 1 + rng() % max_dims;
    g.extent = 1 + rng() % 6;
    g.values.resize(oracle::ipow(g.extent, g.dims));
    for (auto& v : g.values) v = static_cast<Residue>(rng() % g.m);
    return g;
}

}  // namespace

TEST(ForwardTransform, SpecExamples) {
    EXPECT_EQ(as_vector(forward_transform(grid_1d({0, 1, 2})).grid()), (std::vector<Residue>{0, 1, 0}));
    EXPECT_EQ(as_vector(forward_transform(grid_1d({0, 1, 4, 9})).grid()),
              (std::vector<Residue>{0, 1, 2, 0}));
    const ResidueGrid xy(2, 2, 1024, {0, 0, 0, 1});
    EXPECT_EQ(as_vector(forward_transform(xy).grid()), (std::vector<Residue>{0, 0, 0, 1}));
}

TEST(ForwardTransform, SquaresMatchExplicitFormula) {
    EXPECT_EQ(oracle::mahler_coefficients({0, 1, 4, 9}, 1, 4, 1024), (std::vector<std::uint32_t>{0, 1, 2, 0}));
}

TEST(Coeffs1dOracle, SpecExamples) {
    const std::vector<Residue> constant(5, 77);
    EXPECT_EQ(coeffs_1d_oracle(constant, 1024), (std::vector<Residue>{77, 0, 0, 0, 0}));
    const std::vector<Residue> identity{0, 1, 2};
    EXPECT_EQ(coeffs_1d_oracle(identity, 1024), (std::vector<Residue>{0, 1, 0}));
    const std::vector<Residue> delta{1, 0, 0, 0};
    EXPECT_EQ(coeffs_1d_oracle(delta, 1024), (std::vector<Residue>{1, 1023, 1, 1023}));
    EXPECT_THROW(coeffs_1d_oracle(std::span<const Residue>{}, 1024), std::invalid_argument);
}

TEST(Evaluate, SpecExamples) {
    const BinomialTable table(1024, 1023, 99);
    const auto linear = forward_transform(grid_1d({0, 1, 2}));
    EXPECT_EQ(evaluate(linear, Point{5}, table), 5u);
    const MahlerCoefficients zero(ResidueGrid(3, 4, 1024));
    EXPECT_EQ(evaluate(zero, Point{17, 300, 2}, table), 0u);
    const MahlerCoefficients squares(grid_1d({0, 1, 2, 0}));
    EXPECT_EQ(evaluate(squares, Point{10}, table), 100u);
}

TEST(Evaluate, RejectsUncoveredArguments) {
    const BinomialTable small(1024, 10, 3);
    const MahlerCoefficients c(grid_1d({1, 2, 3, 4}));
    EXPECT_THROW(evaluate(c, Point{11}, small), std::out_of_range);
    const MahlerCoefficients wide(grid_1d({1, 2, 3, 4, 5}));
    EXPECT_THROW(evaluate(wide, Point{3}, small), std::out_of_range);
    EXPECT_THROW(evaluate(c, Point{1, 2}, small), std::invalid_argument);
    const BinomialTable other(512, 10, 3);
    EXPECT_THROW(evaluate(c, Point{1}, other), std::invalid_argument);
}

TEST(Evaluate, LineHelperAgreesWithPointEvaluation) {
    std::mt19937_64 rng(3);
    const BinomialTable table(729, 728, 9);
    std::vector<Residue> coeffs(10);
    for (auto& c : coeffs) c = rng() % 729;
    const MahlerCoefficients mc(grid_1d(coeffs, 729));
    for (Coordinate x = 0; x < 729; x += 7) EXPECT_EQ(evaluate_line(coeffs, x, table), evaluate(mc, Point{x}, table));
}

TEST(MahlerProperties, RoundTripOnGrid) {
    std::mt19937_64 rng(101);
    for (int round = 0; round < 300; ++round) {
        const auto g = random_grid(rng);
        const ResidueGrid grid(g.dims, g.extent, g.m, g.values);
        const auto coeffs = forward_transform(grid);
        const BinomialTable table(g.m, g.extent, g.extent);
        for (std::size_t flat = 0; flat < grid.size(); ++flat) {
            const auto idx = grid.multi_index(flat);
            const Point x(std::vector<Coordinate>(idx.begin(), idx.end()));
            ASSERT_EQ(evaluate(coeffs, x, table), grid[flat]);
        }
    }
}

TEST(MahlerProperties, MatchesExplicitFormulaInEveryDimension) {
    std::mt19937_64 rng(202);
    for (int round = 0; round < 200; ++round) {
        const auto g = random_grid(rng);
        const auto coeffs = forward_transform(ResidueGrid(g.dims, g.extent, g.m, g.values));
        ASSERT_EQ(as_vector(coeffs.grid()), oracle::mahler_coefficients(g.values, g.dims, g.extent, g.m));
        if (g.dims == 1) ASSERT_EQ(as_vector(coeffs.grid()), coeffs_1d_oracle(g.values, g.m));
    }
}

TEST(MahlerProperties, AxisOrderDoesNotMatter) {
    std::mt19937_64 rng(303);
    for (int round = 0; round < 100; ++round) {
        auto g = random_grid(rng);
        if (g.dims < 2) continue;
        const ResidueGrid base(g.dims, g.extent, g.m, g.values);
        const auto reference = forward_transform(base);
        std::vector<std::size_t> order(g.dims);
        std::iota(order.begin(), order.end(), 0);
        do {
            ResidueGrid grid = base;
            for (auto axis : order) difference_axis(grid, axis);
            ASSERT_EQ(grid, reference.grid());
        } while (std::next_permutation(order.begin(), order.end()));
    }
}

TEST(MahlerProperties, Linearity) {
    std::mt19937_64 rng(404);
    for (int round = 0; round < 100; ++round) {
        const auto f = random_grid(rng);
        std::vector<Residue> h(f.values.size());
        for (auto& v : h) v = rng() % f.m;
        const ResidueRing ring(f.m);
        const Residue a = rng() % f.m;
        const Residue b = rng() % f.m;
        std::vector<Residue> mix(h.size());
        for (std::size_t i = 0; i < h.size(); ++i) mix[i] = ring.add(ring.mul(a, f.values[i]), ring.mul(b, h[i]));
        const auto cf = forward_transform(ResidueGrid(f.dims, f.extent, f.m, f.values));
        const auto ch = forward_transform(ResidueGrid(f.dims, f.extent, f.m, h));
        const auto cm = forward_transform(ResidueGrid(f.dims, f.extent, f.m, mix));
        for (std::size_t i = 0; i < mix.size(); ++i) {
            ASSERT_EQ(cm.grid()[i], ring.add(ring.mul(a, cf.grid()[i]), ring.mul(b, ch.grid()[i])));
        }
    }
}

TEST(MahlerProperties, LowDegreePolynomialsExtrapolateExactly) {
    std::mt19937_64 rng(505);
    const std::uint64_t m = 1024;
    for (int round = 0; round < 50; ++round) {
        const std::size_t dims = 1 + rng() % 3;
        const std::size_t extent = 2 + rng() % 4;  // total degree < extent
        // f(x) = sum of monomials prod x_d^{k_d} with sum k_d < extent, natural coefficients.
        std::vector<std::pair<std::uint64_t, std::vector<unsigned>>> terms;
        for (int t = 0; t < 4; ++t) {
            std::vector<unsigned> k(dims, 0);
            unsigned left = static_cast<unsigned>(rng() % extent);
            for (auto& kd : k) {
                kd = left ? rng() % (left + 1) : 0;
                left -= kd;
            }
            terms.push_back({rng() % 50, k});
        }
        auto f = [&](const std::vector<std::uint64_t>& x) {
            std::uint64_t s = 0;
            for (const auto& [c, k] : terms) {
                std::uint64_t t = c;
                for (std::size_t d = 0; d < dims; ++d)
                    for (unsigned i = 0; i < k[d]; ++i) t = t * x[d] % m;
                s = (s + t) % m;
            }
            return static_cast<Residue>(s);
        };
        ResidueGrid grid(dims, extent, m);
        for (std::size_t flat = 0; flat < grid.size(); ++flat) {
            const auto idx = grid.multi_index(flat);
            grid[flat] = f({idx.begin(), idx.end()});
        }
        const auto coeffs = forward_transform(grid);
        const BinomialTable table(m, 1023, extent);
        for (int q = 0; q < 20; ++q) {
            std::vector<std::uint64_t> x(dims);
            for (auto& c : x) c = rng() % 1024;
            ASSERT_EQ(evaluate(coeffs, Point(x), table), f(x));
        }
    }
}

TEST(MahlerProperties, EvaluateMatchesTermwiseSumOffGrid) {
    std::mt19937_64 rng(606);
    for (int round = 0; round < 100; ++round) {
        const auto g = random_grid(rng);
        const MahlerCoefficients coeffs(ResidueGrid(g.dims, g.extent, g.m, g.values));
        const BinomialTable table(g.m, 200, g.extent);
        std::vector<std::uint64_t> x(g.dims);
        for (auto& c : x) c = rng() % 201;
        ASSERT_EQ(evaluate(coeffs, Point(x), table), oracle::mahler_evaluate(g.values, g.dims, g.extent, x, g.m));
    }
}

TEST(ContractLeading, WideModulusDoesNotOverflow) {
    const std::uint64_t m = std::uint64_t{1} << 32;
    const Residue top = 0xFFFFFFFFu;
    const MahlerCoefficients c(ResidueGrid(1, 6, m, {top, top, top, top, top, top}));
    const BinomialTable table(m, 10, 5);
    std::vector<Residue> values(6, top);
    EXPECT_EQ(evaluate(c, Point{9}, table), oracle::mahler_evaluate(values, 1, 6, {9}, m));
}

TEST(Truncate, ZeroesHighIndices) {
    MahlerCoefficients c(ResidueGrid(2, 3, 16, {1, 2, 3, 4, 5, 6, 7, 8, 9}));
    truncate(c, 2);
    EXPECT_EQ(as_vector(c.grid()), (std::vector<Residue>{1, 2, 0, 4, 5, 0, 0, 0, 0}));
}

TEST(CoefficientDump, FormatAndRoundTrip) {
    MahlerCoefficients c(ResidueGrid(2, 3, 9, {1, 2, 3, 4, 5, 6, 7, 8, 0}));
    truncate(c, 2);
    std::ostringstream out;
    write_coefficient_dump(out, c, 3, 2, 2);
    EXPECT_EQ(out.str(), "3 2 2 2\n0 0 1\n0 1 2\n1 0 4\n1 1 5\n");
    std::istringstream in(out.str());
    auto [header, back] = read_coefficient_dump(in, 3);
    EXPECT_EQ(header.prime, 3u);
    EXPECT_EQ(header.precision, 2u);
    EXPECT_EQ(header.dimension, 2u);
    EXPECT_EQ(header.truncation, 2u);
    EXPECT_EQ(back, c);
}

TEST(CoefficientDump, RejectsMalformedInput) {
    auto load = [](const std::string& text) {
        std::istringstream in(text);
        return read_coefficient_dump(in, 3);
    };
    EXPECT_THROW(load(""), std::runtime_error);
    EXPECT_THROW(load("4 2 1 2\n0 1\n1 1\n"), std::runtime_error);       // p not prime
    EXPECT_THROW(load("3 2 1 2\n0 1\n"), std::runtime_error);            // truncated
    EXPECT_THROW(load("3 2 1 2\n1 1\n0 1\n"), std::runtime_error);       // out of order
    EXPECT_THROW(load("3 2 1 2\n0 9\n1 1\n"), std::runtime_error);       // value >= p^E
    EXPECT_THROW(load("3 2 1 4\n0 1\n1 1\n2 1\n3 1\n"), std::runtime_error);  // L > extent
    EXPECT_THROW(load("3 2 1 2\n0 x\n1 1\n"), std::runtime_error);
}
