#include "chanchart/dataset_io.hpp"

#include <fstream>
#include <string>

#include "chanchart/binio.hpp"

namespace chanchart {

using namespace binio;

void write_dataset(const Dataset& ds, const std::filesystem::path& path) {
    ds.validate();

    const bool has_gt = ds.has_ground_truth();
    if (!has_gt) {
        for (std::size_t i = 0; i < ds.samples.size(); ++i)
            if (ds.samples[i].ground_truth)
                throw ValidationError("ground truth present on sample " + std::to_string(i) +
                                      " but missing elsewhere; must be all-or-none");
    }

    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os)
        throw IoError("cannot open for writing: " + path.string());

    os.write(kDatasetMagic, 4);
    write_u32(os, static_cast<std::uint32_t>(ds.samples.size()));
    write_u32(os, ds.meta.n_antennas);
    write_u32(os, ds.meta.n_subcarriers);
    write_u32(os, ds.meta.cyclic_prefix);
    write_u8(os, static_cast<std::uint8_t>(ds.meta.array.kind));
    write_u16(os, ds.meta.array.rows);
    write_u16(os, ds.meta.array.cols);
    write_f64(os, ds.meta.bandwidth_hz);
    write_f64(os, ds.meta.carrier_hz);
    write_u8(os, has_gt ? 1 : 0);

    for (const CSISample& s : ds.samples) {
        write_u32(os, s.ue_id);
        write_f64(os, s.timestamp);
        if (has_gt) {
            write_f64(os, (*s.ground_truth)(0));
            write_f64(os, (*s.ground_truth)(1));
        }
        for (int b = 0; b < s.h.rows(); ++b) {
            for (int w = 0; w < s.h.cols(); ++w) {
                write_f32(os, s.h(b, w).real());
                write_f32(os, s.h(b, w).imag());
            }
        }
    }
    os.flush();
    if (!os)
        throw IoError("write failed: " + path.string());
}

Dataset read_dataset(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is)
        throw IoError("cannot open for reading: " + path.string());

    char magic[4];
    is.read(magic, 4);
    if (!is || std::string(magic, 4) != std::string(kDatasetMagic, 4))
        throw FormatError("bad magic, not a CCD1 dataset: " + path.string());

    Dataset ds;
    const std::uint32_t n = read_u32(is, "header N");
    ds.meta.n_antennas = read_u32(is, "header B");
    ds.meta.n_subcarriers = read_u32(is, "header W");
    ds.meta.cyclic_prefix = read_u32(is, "header C");
    const std::uint8_t geom = read_u8(is, "header geometry");
    if (geom > 1)
        throw FormatError("unknown geometry tag " + std::to_string(geom));
    ds.meta.array.kind = static_cast<ArrayGeometry>(geom);
    ds.meta.array.rows = read_u16(is, "header rows");
    ds.meta.array.cols = read_u16(is, "header cols");
    ds.meta.bandwidth_hz = read_f64(is, "header bandwidth");
    ds.meta.carrier_hz = read_f64(is, "header carrier");
    const bool has_gt = read_u8(is, "header ground-truth flag") != 0;

    const int B = int(ds.meta.n_antennas);
    const int W = int(ds.meta.n_subcarriers);
    ds.samples.reserve(n);
    for (std::uint32_t i = 0; i < n; ++i) {
        const std::string rec = "record " + std::to_string(i);
        CSISample s;
        s.ue_id = read_u32(is, rec.c_str());
        s.timestamp = read_f64(is, rec.c_str());
        if (has_gt) {
            Eigen::Vector2d gt;
            gt(0) = read_f64(is, rec.c_str());
            gt(1) = read_f64(is, rec.c_str());
            s.ground_truth = gt;
        }
        s.h.resize(B, W);
        for (int b = 0; b < B; ++b) {
            for (int w = 0; w < W; ++w) {
                const float re = read_f32(is, rec.c_str());
                const float im = read_f32(is, rec.c_str());
                s.h(b, w) = std::complex<float>(re, im);
            }
        }
        ds.samples.push_back(std::move(s));
    }

    ds.validate();
    return ds;
}

} // namespace chanchart
