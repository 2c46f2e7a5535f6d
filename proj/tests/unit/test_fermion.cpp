// Copyright 2026 The PIGen-SQD Authors
// SPDX-License-Identifier: Apache-2.0

#include "pigen/fermion.hpp"
#include "pigen/random.hpp"

#include <gtest/gtest.h>

#include <map>
#include <set>
#include <vector>

using namespace pigen;

TEST(Determinant, MakeDeterminantPlacesBits) {
    const OrbitalBasis b4{4, 2, 2};
    const auto hf = make_determinant({0, 1}, {0, 1}, b4);
    EXPECT_EQ(hf.alpha, 0b0011u);
    EXPECT_EQ(hf.beta, 0b0011u);

    const auto vac = make_determinant({}, {}, b4);
    EXPECT_EQ(vac.alpha, 0u);
    EXPECT_EQ(vac.beta, 0u);

    const OrbitalBasis b3{3, 2, 1};
    const auto d = make_determinant({0, 2}, {1}, b3);
    EXPECT_EQ(d.alpha, 0b101u);
    EXPECT_EQ(d.beta, 0b010u);
}

TEST(Determinant, MakeDeterminantRejectsBadIndices) {
    const OrbitalBasis b{3, 1, 1};
    EXPECT_THROW((void)make_determinant({3}, {0}, b), ConfigError);
    EXPECT_THROW((void)make_determinant({-1}, {0}, b), ConfigError);
    EXPECT_THROW((void)make_determinant({1, 1}, {0}, b), ConfigError);
}

TEST(Determinant, ExcitationRank) {
    const OrbitalBasis b{4, 2, 2};
    const auto ref = reference_determinant(b);
    EXPECT_EQ(excitation_rank(ref, ref), 0);
    const auto single = make_determinant({1, 2}, {0, 1}, b);  // alpha 0 -> 2
    EXPECT_EQ(excitation_rank(single, ref), 1);
    const auto dbl = make_determinant({1, 2}, {0, 3}, b);  // alpha 0->2, beta 1->3
    EXPECT_EQ(excitation_rank(dbl, ref), 2);
    EXPECT_EQ(excitation_rank(ref, dbl), excitation_rank(dbl, ref));
    EXPECT_THROW((void)excitation_rank(make_determinant({0}, {0, 1}, b), ref), ConfigError);
}

TEST(Determinant, OrderingIsLexicographic) {
    EXPECT_LT((Determinant{1, 5}), (Determinant{2, 0}));
    EXPECT_LT((Determinant{1, 2}), (Determinant{1, 3}));
}

TEST(Bitstring, BlockedRoundTripAndConvention) {
    const OrbitalBasis b{4, 2, 2};
    const auto d = make_determinant({0, 2}, {1, 3}, b);
    EXPECT_EQ(to_bitstring(d, 4), "10100101");
    EXPECT_EQ(from_bitstring("10100101", 4), d);
    EXPECT_EQ(to_bitstring(d, 4, BitLayout::Interleaved), "10011001");
    EXPECT_EQ(from_bitstring("10011001", 4, BitLayout::Interleaved), d);
    EXPECT_THROW((void)from_bitstring("101", 4), FormatError);
    EXPECT_THROW((void)from_bitstring("1010x101", 4), FormatError);
}

TEST(SymmetryFilter, KeepsSectorAndCountsFrequency) {
    const OrbitalBasis b{4, 2, 2};
    const std::vector<BitstringCount> raw{{"00110011", 5}, {"01110011", 2}};
    const auto c = symmetry_filter(raw, b);
    ASSERT_EQ(c.size(), 1u);
    EXPECT_EQ(c[0], make_determinant({2, 3}, {2, 3}, b));
    EXPECT_EQ(c.frequency(0), 5u);
    EXPECT_EQ(c.provenance(0), Provenance::Hardware);
}

TEST(SymmetryFilter, EmptyInputAndWrongLength) {
    const OrbitalBasis b{4, 2, 2};
    EXPECT_TRUE(symmetry_filter(std::vector<BitstringCount>{}, b).empty());
    const std::vector<BitstringCount> bad{{"0011", 1}};
    EXPECT_THROW((void)symmetry_filter(bad, b), FormatError);
}

TEST(SymmetryFilter, DeduplicatesAndIsIdempotent) {
    const OrbitalBasis b{4, 2, 1};
    std::vector<BitstringCount> raw{{"11000100", 3}, {"11000100", 4}, {"10100100", 1}, {"11001100", 9}};
    const auto c = symmetry_filter(raw, b);
    ASSERT_EQ(c.size(), 2u);
    for (const auto& d : c) {
        EXPECT_EQ(d.n_alpha(), 2);
        EXPECT_EQ(d.n_beta(), 1);
    }
    EXPECT_EQ(c.frequency(c.find(from_bitstring("11000100", 4))), 7u);

    std::vector<BitstringCount> again;
    for (std::size_t i = 0; i < c.size(); ++i) again.emplace_back(to_bitstring(c[i], 4), c.frequency(i));
    const auto c2 = symmetry_filter(again, b);
    ASSERT_EQ(c2.size(), c.size());
    for (std::size_t i = 0; i < c.size(); ++i) {
        EXPECT_EQ(c2[i], c[i]);
        EXPECT_EQ(c2.frequency(i), c.frequency(i));
    }
}

TEST(ConfigurationSet, InsertionOrderAndMerge) {
    ConfigurationSet a;
    EXPECT_TRUE(a.insert({3, 1}, Provenance::Reference));
    EXPECT_TRUE(a.insert({1, 3}, Provenance::Perturbative));
    EXPECT_FALSE(a.insert({3, 1}, Provenance::Generated));
    EXPECT_EQ(a.provenance(0), Provenance::Reference);
    EXPECT_EQ(a.frequency(0), 2u);
    ConfigurationSet b;
    b.insert({1, 3}, Provenance::Generated);
    b.insert({5, 1}, Provenance::Generated);
    EXPECT_EQ(a.merge(b), 1u);
    ASSERT_EQ(a.size(), 3u);
    EXPECT_EQ(a[2], (Determinant{5, 1}));
    a.sort();
    EXPECT_EQ(a[0], (Determinant{1, 3}));
    EXPECT_EQ(a.find(Determinant{7, 7}), a.size());
}

TEST(SymmetrySpace, Dimension) {
    EXPECT_EQ(symmetry_space_dimension({12, 4, 4}), 245025u);
    EXPECT_EQ(symmetry_space_dimension({2, 1, 1}), 4u);
    EXPECT_EQ(symmetry_space_dimension({16, 5, 5}), 19079424u);  // 4368^2
    EXPECT_EQ(symmetry_space_dimension({64, 1, 1}), 4096u);
    EXPECT_THROW((void)symmetry_space_dimension({64, 32, 32}), ConfigError);  // C(64,32)^2 > 2^64
}

TEST(SymmetrySpace, EnumerationMatchesDimension) {
    EXPECT_EQ(enumerate_symmetry_space({2, 1, 1}, 100).size(), 4u);
    EXPECT_EQ(enumerate_symmetry_space({4, 2, 2}, 100).size(), 36u);
    for (int n = 0; n <= 9; ++n)
        for (int na = 0; na <= n; ++na)
            for (int nb = 0; nb <= n; nb += 2) {
                const OrbitalBasis b{n, na, nb};
                const auto all = enumerate_symmetry_space(b, 1'000'000);
                ASSERT_EQ(all.size(), symmetry_space_dimension(b));
                for (std::size_t k = 1; k < all.size(); ++k) ASSERT_LT(all[k - 1], all[k]);
                for (const auto& d : all) {
                    ASSERT_EQ(d.n_alpha(), na);
                    ASSERT_EQ(d.n_beta(), nb);
                    ASSERT_EQ(d.alpha >> n, 0u);
                }
            }
    EXPECT_THROW((void)enumerate_symmetry_space({8, 4, 4}, 100), ConfigError);
}

TEST(SymmetrySpace, RandomSectorDrawsAreUniformAndValid) {
    const OrbitalBasis b{4, 2, 2};
    Rng rng(derive_seed(42, Stream::RandomBaseline));
    std::map<Determinant, int> hits;
    const int draws = 36000;
    for (int k = 0; k < draws; ++k) {
        const auto d = random_sector_determinant(b, rng);
        ASSERT_EQ(d.n_alpha(), 2);
        ASSERT_EQ(d.n_beta(), 2);
        ++hits[d];
    }
    ASSERT_EQ(hits.size(), 36u);
    // Each cell ~ Binomial(36000, 1/36): mean 1000, sd ~31.2; 6 sd band.
    for (const auto& [d, n] : hits) {
        EXPECT_GT(n, 1000 - 188);
        EXPECT_LT(n, 1000 + 188);
    }
}

TEST(Seeds, DerivedStreamsAreDistinctAndStable) {
    std::set<u64> seen;
    for (auto s : {Stream::Sampler, Stream::RbmInit, Stream::TrainingDistribution, Stream::Training,
                   Stream::Generation, Stream::RandomBaseline})
        seen.insert(derive_seed(7, s));
    EXPECT_EQ(seen.size(), 6u);
    EXPECT_EQ(derive_seed(7, Stream::Sampler), derive_seed(7, Stream::Sampler));
    EXPECT_NE(derive_seed(7, Stream::Sampler), derive_seed(8, Stream::Sampler));
}
