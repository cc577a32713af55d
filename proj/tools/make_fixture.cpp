// Copyright 2026 The ccqfl developers

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at

//     http://www.apache.org/licenses/LICENSE-2.0

// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Writes a synthetic two-digit IDX dataset (train + test pairs) for running
// the experiment presets in environments without the MNIST files.

#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "ccqfl/fixture.hpp"

int main(int argc, char **argv) {
    CLI::App app{"generate a synthetic two-digit IDX dataset"};
    std::string out_dir = "data";
    std::size_t train_count = 6000;
    std::size_t test_count = 2000;
    std::uint64_t seed = 2026;
    app.add_option("--out", out_dir, "output directory");
    app.add_option("--train", train_count, "training image count");
    app.add_option("--test", test_count, "test image count");
    app.add_option("--seed", seed, "generator seed");
    CLI11_PARSE(app, argc, argv);

    try {
        std::filesystem::create_directories(out_dir);
        const std::filesystem::path out(out_dir);
        ccqfl::fixture::write_synthetic_idx((out / "train-images-idx3-ubyte").string(),
                                            (out / "train-labels-idx1-ubyte").string(),
                                            train_count, seed);
        ccqfl::fixture::write_synthetic_idx((out / "t10k-images-idx3-ubyte").string(),
                                            (out / "t10k-labels-idx1-ubyte").string(),
                                            test_count, seed + 1);
    } catch (const std::exception &e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    std::cout << "wrote " << train_count << " train and " << test_count
              << " test images under " << out_dir << '\n';
    return 0;
}
