#include "xmotion/checkpoint.hpp"

#include <bit>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "xmotion/errors.hpp"

namespace xmotion {

namespace {

constexpr const char* kMagic = "xmotion-checkpoint 1";

void put_f64_le(std::string& out, double v) {
  const auto bits = std::bit_cast<std::uint64_t>(v);
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((bits >> (8 * i)) & 0xff));
}

double get_f64_le(const char* p) {
  std::uint64_t bits = 0;
  for (int i = 0; i < 8; ++i)
    bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(p[i])) << (8 * i);
  return std::bit_cast<double>(bits);
}

}  // namespace

void save_checkpoint(const std::string& path, const NamedTensors& params) {
  std::ostringstream manifest;
  manifest << kMagic << "\n" << params.size() << "\n";
  std::string blob;
  for (const auto& [name, tensor] : params) {
    if (name.find_first_of(" \t\n") != std::string::npos) {
      throw ContractError("checkpoint: parameter name contains whitespace: " + name);
    }
    manifest << "param " << name << " " << tensor.rank();
    for (int d : tensor.shape()) manifest << " " << d;
    manifest << " " << blob.size() << "\n";
    for (int i = 0; i < tensor.size(); ++i) put_f64_le(blob, tensor.at(i));
  }
  manifest << "end\n";

  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + tmp);
    out << manifest.str();
    out.write(blob.data(), static_cast<std::streamsize>(blob.size()));
    if (!out) throw IoError("write failed for " + tmp);
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("cannot move " + tmp + " to " + path + ": " + ec.message());
}

NamedTensors load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);

  std::string line;
  int line_no = 0;
  auto next_line = [&]() {
    if (!std::getline(in, line)) throw ParseError("checkpoint truncated", line_no);
    ++line_no;
  };

  next_line();
  if (line != kMagic) throw ParseError("bad checkpoint magic", line_no);
  next_line();
  size_t count = 0;
  try {
    count = std::stoul(line);
  } catch (const std::exception&) {
    throw ParseError("bad parameter count", line_no);
  }

  struct Entry {
    std::string name;
    std::vector<int> shape;
    size_t offset;
    int size;
  };
  std::vector<Entry> entries;
  entries.reserve(count);
  for (size_t i = 0; i < count; ++i) {
    next_line();
    std::istringstream ls(line);
    std::string tag;
    Entry e;
    int rank = 0;
    ls >> tag >> e.name >> rank;
    if (!ls || tag != "param" || rank < 1) throw ParseError("bad manifest entry", line_no);
    e.size = 1;
    for (int d = 0; d < rank; ++d) {
      int extent = 0;
      ls >> extent;
      if (!ls || extent <= 0) throw ParseError("bad manifest extent", line_no);
      e.shape.push_back(extent);
      e.size *= extent;
    }
    ls >> e.offset;
    if (!ls) throw ParseError("bad manifest offset", line_no);
    entries.push_back(std::move(e));
  }
  next_line();
  if (line != "end") throw ParseError("missing manifest terminator", line_no);

  std::string blob((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  NamedTensors params;
  params.reserve(entries.size());
  for (const auto& e : entries) {
    const size_t bytes = static_cast<size_t>(e.size) * 8;
    if (e.offset + bytes > blob.size()) throw ParseError("blob shorter than manifest claims");
    std::vector<double> data(static_cast<size_t>(e.size));
    for (int i = 0; i < e.size; ++i) {
      data[static_cast<size_t>(i)] = get_f64_le(blob.data() + e.offset + static_cast<size_t>(i) * 8);
    }
    params.emplace_back(e.name, Tensor::from_data(e.shape, std::move(data)));
  }
  return params;
}

}  // namespace xmotion
