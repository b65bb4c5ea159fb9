#include <gtest/gtest.h>

#include <fstream>
#include <string>

#include "fixtures.hpp"
#include "srres/tensor.hpp"

using namespace srres;

TEST(Tensor, NewFillsConstant) {
  const auto zeros = tensor_new<float>({1, 1, 2, 2}, 0.0f);
  EXPECT_EQ(zeros.vec(), std::vector<float>(4, 0.0f));
  const auto halves = tensor_new<float>({1, 2, 1, 1}, 1.5f);
  EXPECT_EQ(halves.vec(), (std::vector<float>{1.5f, 1.5f}));
}

TEST(Tensor, ZeroDimensionIsInvalid) {
  EXPECT_THROW(tensor_new<float>({1, 0, 2, 2}, 0.0f), InvalidShape);
  EXPECT_THROW(Tensor({1, 1, 2, 2}, std::vector<float>(3)), InvalidShape);
}

TEST(Tensor, Elementwise) {
  const Tensor a({1, 1, 1, 2}, {1, 2});
  const Tensor b({1, 1, 1, 2}, {3, 4});
  EXPECT_EQ(add(a, b).vec(), (std::vector<float>{4, 6}));
  EXPECT_EQ(scale(a, 0.0f).vec(), (std::vector<float>{0, 0}));
  EXPECT_EQ(sub(a, a).vec(), (std::vector<float>{0, 0}));
  EXPECT_EQ(mul(a, b).vec(), (std::vector<float>{3, 8}));
  EXPECT_THROW(add(a, Tensor({1, 1, 2, 1}, 0.0f)), ShapeMismatch);
}

TEST(Tensor, ElementwiseExactOnIntegers) {
  Rng rng(3);
  Tensor a({2, 3, 4, 5}, 0.0f), b({2, 3, 4, 5}, 0.0f);
  for (std::size_t i = 0; i < a.size(); ++i) {
    a[i] = float(int(rng.below(2001)) - 1000);
    b[i] = float(int(rng.below(2001)) - 1000);
  }
  const auto s = add(a, b), d = sub(a, b), p = mul(a, b);
  for (std::size_t i = 0; i < a.size(); ++i) {
    const long ai = long(a[i]), bi = long(b[i]);
    EXPECT_EQ(s[i], float(ai + bi));
    EXPECT_EQ(d[i], float(ai - bi));
    EXPECT_EQ(p[i], float(ai * bi));
  }
}

TEST(Im2col, UnitKernelIsIdentityLayout) {
  const Tensor x({1, 1, 2, 2}, {1, 2, 3, 4});
  const auto cols = im2col(x, {1, 1, 1, 0});
  ASSERT_EQ(cols.rows(), 1);
  ASSERT_EQ(cols.cols(), 4);
  for (int j = 0; j < 4; ++j) EXPECT_EQ(cols(0, j), float(j + 1));
}

TEST(Im2col, PaddedWindowColumn) {
  const Tensor x({1, 1, 2, 2}, {1, 2, 3, 4});
  const auto cols = im2col(x, {3, 3, 1, 1});
  ASSERT_EQ(cols.rows(), 9);
  ASSERT_EQ(cols.cols(), 4);
  // Hand enumeration of the zero-padded 3x3 window around output (0, 0).
  const float expected[9] = {0, 0, 0, 0, 1, 2, 0, 3, 4};
  for (int r = 0; r < 9; ++r) EXPECT_EQ(cols(r, 0), expected[r]) << "row " << r;
}

TEST(Im2col, NonIntegralOutputIsInvalid) {
  const Tensor x({1, 1, 3, 3}, 1.0f);
  EXPECT_THROW(im2col(x, {2, 2, 2, 0}), InvalidShape);
}

// col2im(im2col(x)) multiplies each pixel by how many windows contain it.
TEST(Im2col, Col2imCountsPatchMembership) {
  Rng rng(11);
  for (std::size_t h = 1; h <= 4; ++h) {
    for (std::size_t w = 1; w <= 4; ++w) {
      for (const Window win : {Window{1, 1, 1, 0}, Window{3, 3, 1, 1}, Window{2, 2, 1, 0}, Window{3, 3, 1, 0},
                               Window{2, 2, 2, 0}}) {
        if (h + 2 * win.pad < win.kh || w + 2 * win.pad < win.kw) continue;
        if ((h + 2 * win.pad - win.kh) % win.stride || (w + 2 * win.pad - win.kw) % win.stride) continue;
        const Tensor x = random_uniform<float>({2, 2, h, w}, rng, 1.0f, 2.0f);
        const Tensor back = col2im(im2col(x, win), x.shape(), win);
        const std::size_t oh = (h + 2 * win.pad - win.kh) / win.stride + 1;
        const std::size_t ow = (w + 2 * win.pad - win.kw) / win.stride + 1;
        for (std::size_t y = 0; y < h; ++y) {
          for (std::size_t xx = 0; xx < w; ++xx) {
            int count = 0;
            for (std::size_t i = 0; i < oh; ++i)
              for (std::size_t j = 0; j < ow; ++j)
                for (std::size_t u = 0; u < win.kh; ++u)
                  for (std::size_t v = 0; v < win.kw; ++v)
                    if (long(i * win.stride + u) - long(win.pad) == long(y) &&
                        long(j * win.stride + v) - long(win.pad) == long(xx))
                      ++count;
            for (std::size_t n = 0; n < 2; ++n)
              for (std::size_t c = 0; c < 2; ++c)
                EXPECT_FLOAT_EQ(back(n, c, y, xx), x(n, c, y, xx) * float(count));
          }
        }
      }
    }
  }
}

TEST(Rng, Seed42MatchesCommittedFixture) {
  std::ifstream in(fixture::data_file("rng_seed42.txt"));
  ASSERT_TRUE(in) << "missing fixture";
  Rng rng(42);
  std::string line;
  int n = 0;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    EXPECT_EQ(rng.next_u64(), std::stoull(line, nullptr, 16)) << "value " << n;
    ++n;
  }
  EXPECT_EQ(n, 16);
}

TEST(Rng, UniformAndBelowStayInRange) {
  Rng rng(7);
  for (int i = 0; i < 10000; ++i) {
    const double u = rng.uniform();
    EXPECT_GE(u, 0.0);
    EXPECT_LT(u, 1.0);
    EXPECT_LT(rng.below(13), 13u);
  }
  EXPECT_THROW(rng.below(0), InvalidConfig);
}

TEST(Rng, NormalMoments) {
  Rng rng(99);
  double sum = 0, sq = 0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double v = rng.normal();
    sum += v;
    sq += v * v;
  }
  EXPECT_NEAR(sum / n, 0.0, 0.01);
  EXPECT_NEAR(sq / n, 1.0, 0.02);
}
