#include <filesystem>
#include <iostream>
#include <string>

#include "gmc/synthetic.hpp"

// Regenerates the committed corpus fixtures. Run from the repository root:
//   build/make_fixtures [data]
int main(int argc, char** argv) {
    std::string dir = argc > 1 ? argv[1] : "data";
    std::filesystem::create_directories(dir);
    const std::string toy = dir + "/toy_corpus.jsonl";
    const std::string zipf = dir + "/zipf_corpus.jsonl";
    gmc::write_toy_corpus(toy, 7);
    gmc::write_zipf_corpus(zipf, 11);
    std::cout << "wrote " << toy << " and " << zipf << '\n';
    return 0;
}
