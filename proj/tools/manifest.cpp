#include "manifest.hpp"

#include "rbdsde/errors.hpp"

#include <Eigen/Core>
#include <boost/version.hpp>
#include <fmt/format.h>
#include <openssl/evp.h>
#include <openssl/opensslv.h>

#include <array>
#include <fstream>
#include <iterator>
#include <memory>

#ifndef RBDSDE_VERSION
#define RBDSDE_VERSION "0.0.0"
#endif

namespace rbdsde::cli {
namespace {

class Digest {
public:
    Digest() : ctx_(EVP_MD_CTX_new(), &EVP_MD_CTX_free) {
        if (!ctx_ || EVP_DigestInit_ex(ctx_.get(), EVP_sha256(), nullptr) != 1) {
            throw NumericalError("SHA-256 initialisation failed");
        }
    }
    void update(const char* data, std::size_t n) {
        if (EVP_DigestUpdate(ctx_.get(), data, n) != 1) throw NumericalError("SHA-256 update failed");
    }
    std::string hex() {
        std::array<unsigned char, EVP_MAX_MD_SIZE> out{};
        unsigned int len = 0;
        if (EVP_DigestFinal_ex(ctx_.get(), out.data(), &len) != 1) {
            throw NumericalError("SHA-256 finalisation failed");
        }
        std::string s;
        for (unsigned int i = 0; i < len; ++i) s += fmt::format("{:02x}", out[i]);
        return s;
    }

private:
    std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx_;
};

}  // namespace

std::string sha256_hex(const std::string& bytes) {
    Digest d;
    d.update(bytes.data(), bytes.size());
    return d.hex();
}

std::string sha256_file(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw ValidationError("cannot read " + path.string());
    Digest d;
    std::array<char, 1 << 16> buf{};
    while (is) {
        is.read(buf.data(), buf.size());
        d.update(buf.data(), static_cast<std::size_t>(is.gcount()));
    }
    return d.hex();
}

void write_manifest(const ManifestInput& in) {
    nlohmann::json files = nlohmann::json::array();
    for (const auto& name : in.files) {
        const auto path = in.directory / name;
        files.push_back({{"name", name},
                         {"sha256", sha256_file(path)},
                         {"bytes", std::filesystem::file_size(path)}});
    }
    const nlohmann::json m{
        {"tool", "rbdsde"},
        {"version", RBDSDE_VERSION},
        {"subcommand", in.subcommand},
        {"scenario", in.scenario_path},
        {"scenario_name", in.scenario_name},
        {"config", in.config},
        {"config_sha256", sha256_hex(in.config.dump())},
        {"seed", in.seed},
        {"b_streams", in.b_streams},
        {"workers", in.workers},
        {"wall_time_seconds", in.wall_seconds},
        {"libraries",
         {{"eigen", fmt::format("{}.{}.{}", EIGEN_WORLD_VERSION, EIGEN_MAJOR_VERSION, EIGEN_MINOR_VERSION)},
          {"fmt", FMT_VERSION},
          {"boost", BOOST_LIB_VERSION},
          {"openssl", OPENSSL_VERSION_TEXT}}},
        {"files", files},
    };
    std::ofstream os(in.directory / "manifest.json", std::ios::binary);
    os << m.dump(2) << '\n';
    if (!os) throw ValidationError("failed writing manifest.json");
}

}  // namespace rbdsde::cli
