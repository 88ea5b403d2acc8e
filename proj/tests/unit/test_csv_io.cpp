#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <sstream>

#include "fusionclust/csv_io.hpp"
#include "generators.hpp"

using namespace fusionclust;

TEST_SUITE("csv_io") {

TEST_CASE("reads missing entries as unobserved")
{
    std::istringstream in("# comment\n1,,3\nNaN,5,6\n7,8,NA\n");
    const LabeledDataset d = read_dataset_csv(in);
    REQUIRE(d.data.features() == 3);
    REQUIRE(d.data.points() == 3);
    CHECK_FALSE(d.truth.has_value());
    CHECK_FALSE(d.data.observed(1, 0));
    CHECK_FALSE(d.data.observed(0, 1));
    CHECK_FALSE(d.data.observed(2, 2));
    CHECK(d.data.observed_count() == 6);
    CHECK(d.data.values()(2, 1) == 6.0);
}

TEST_CASE("header with a label column carries ground truth")
{
    std::istringstream in("f1,f2,label\n0.5,1,3\n2,,3\n1,1,8\n");
    const LabeledDataset d = read_dataset_csv(in);
    REQUIRE(d.truth.has_value());
    CHECK(d.data.features() == 2);
    CHECK(d.truth->labels() == std::vector<int>{0, 0, 1});
}

TEST_CASE("malformed input is rejected")
{
    std::istringstream ragged("1,2\n3\n");
    CHECK_THROWS(read_dataset_csv(ragged));
    std::istringstream junk("1,2\n3,abc\n");
    CHECK_THROWS(read_dataset_csv(junk));
    std::istringstream empty("# nothing\n");
    CHECK_THROWS(read_dataset_csv(empty));
    std::istringstream bad_label("a,label\n1,0.5\n");
    CHECK_THROWS(read_dataset_csv(bad_label));
}

TEST_CASE("write then read round-trips values, mask and labels")
{
    testgen::Rng rng(3);
    for (int t = 0; t < 20; ++t) {
        const int P = testgen::integer(rng, 1, 6);
        const int N = testgen::integer(rng, 1, 9);
        const ObservedDataset d = testgen::dataset(rng, P, N, 0.7, 1e3);
        const Partition truth = Partition::canonical(testgen::labels(rng, N, 3));
        std::stringstream io;
        write_dataset_csv(io, d, truth, {"generated"});
        const LabeledDataset back = read_dataset_csv(io);
        REQUIRE(back.truth.has_value());
        CHECK(*back.truth == truth);
        CHECK((back.data.mask() == d.mask()).all());
        for (int i = 0; i < N; ++i)
            for (int p = 0; p < P; ++p)
                if (d.observed(p, i)) CHECK(back.data.values()(p, i) == d.values()(p, i));
    }
}

TEST_CASE("missing entries are written as empty fields")
{
    MaskMatrix m = MaskMatrix::Constant(2, 1, true);
    m(1, 0) = false;
    std::ostringstream out;
    write_dataset_csv(out, ObservedDataset(Matrix::Constant(2, 1, 0.25), m));
    CHECK(out.str() == "f1,f2\n0.25,\n");
}

TEST_CASE("format_double is the shortest round-trip form")
{
    CHECK(format_double(0.1) == "0.1");
    CHECK(format_double(1.0) == "1");
    CHECK(format_double(-2.5e-300) == "-2.5e-300");
    const double v = 0.1 + 0.2;
    CHECK(std::stod(format_double(v)) == v);
}

}
