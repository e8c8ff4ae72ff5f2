#include "persona_lab/common/records.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <fstream>
#include <sstream>

namespace persona_lab {

namespace fs = std::filesystem;

std::string header_line(std::string_view kind) {
  std::string line(kFormatVersion);
  line.push_back(' ');
  line.append(kind);
  return line;
}

std::string canonical(const json& value) {
  try {
    return value.dump();
  } catch (const json::type_error& e) {
    throw Error(ErrorCode::InvalidRequest, std::string("text is not valid UTF-8: ") + e.what());
  }
}

std::string read_text_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoFailure, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const fs::path& path, std::string_view contents) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoFailure, "cannot write " + tmp.string());
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) throw Error(ErrorCode::IoFailure, "short write to " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw Error(ErrorCode::IoFailure, "cannot rename " + tmp.string() + ": " + ec.message());
}

RecordFile read_record_file(const fs::path& path, std::string_view expected_kind,
                            ErrorCode corrupt_code) {
  const std::string contents = read_text_file(path);
  RecordFile file;
  std::size_t pos = 0;
  std::size_t line_no = 0;
  const std::string expected_header = header_line(expected_kind);
  while (pos < contents.size()) {
    auto nl = contents.find('\n', pos);
    ++line_no;
    if (nl == std::string::npos) {
      throw Error(corrupt_code,
                  path.filename().string() + ": line " + std::to_string(line_no) +
                      " is not newline-terminated (truncated write?)",
                  {{"line", line_no}, {"path", path.string()}});
    }
    std::string_view line(contents.data() + pos, nl - pos);
    pos = nl + 1;
    if (line_no == 1) {
      if (line != expected_header) {
        throw Error(corrupt_code,
                    path.filename().string() + ": expected header '" + expected_header + "'",
                    {{"line", 1}, {"path", path.string()}});
      }
      file.kind = std::string(expected_kind);
      continue;
    }
    json parsed = json::parse(line, nullptr, false);
    if (parsed.is_discarded() || !parsed.is_object()) {
      throw Error(corrupt_code,
                  path.filename().string() + ": line " + std::to_string(line_no) +
                      " is not a valid record",
                  {{"line", line_no}, {"path", path.string()}});
    }
    file.records.push_back(std::move(parsed));
  }
  if (line_no == 0) {
    throw Error(corrupt_code, path.filename().string() + ": empty file",
                {{"line", 1}, {"path", path.string()}});
  }
  return file;
}

void write_record_file(const fs::path& path, std::string_view kind,
                       const std::vector<json>& records) {
  std::string out = header_line(kind);
  out.push_back('\n');
  for (const auto& r : records) {
    out += canonical(r);
    out.push_back('\n');
  }
  write_text_file(path, out);
}

void append_record(const fs::path& path, std::string_view kind, const json& record,
                   bool durable) {
  std::string payload;
  const bool fresh = !fs::exists(path) || fs::file_size(path) == 0;
  if (fresh) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    payload = header_line(kind);
    payload.push_back('\n');
  }
  payload += canonical(record);
  payload.push_back('\n');

  int fd = ::open(path.c_str(), O_WRONLY | O_CREAT | O_APPEND | O_CLOEXEC, 0644);
  if (fd < 0) {
    throw Error(ErrorCode::IoFailure, "cannot open " + path.string() + ": " + std::strerror(errno));
  }
  const char* data = payload.data();
  std::size_t left = payload.size();
  while (left > 0) {
    ssize_t n = ::write(fd, data, left);
    if (n < 0) {
      if (errno == EINTR) continue;
      ::close(fd);
      throw Error(ErrorCode::IoFailure, "write failed on " + path.string());
    }
    data += n;
    left -= static_cast<std::size_t>(n);
  }
  if (durable) ::fsync(fd);
  ::close(fd);
}

}  // namespace persona_lab
