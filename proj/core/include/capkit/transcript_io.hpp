#ifndef CAPKIT_TRANSCRIPT_IO_HPP
#define CAPKIT_TRANSCRIPT_IO_HPP

#include <iosfwd>
#include <vector>

#include <json.hpp>

#include "capkit/audio.hpp"

namespace capkit::audio {

/// dBFS on the wire: a number, or the string "-inf" for silence.
nlohmann::json dbfs_to_json(double dbfs);
double dbfs_from_json(const nlohmann::json& j);

void to_json(nlohmann::json& j, const Transcript& t);
void from_json(const nlohmann::json& j, Transcript& t);

/// Reads newline-delimited {"seq":..,"text":..,"dbfs":..} records. Blank
/// lines are skipped. Throws std::runtime_error with the line number on a
/// malformed record.
std::vector<Transcript> read_transcripts(std::istream& in);
void write_transcript(std::ostream& out, const Transcript& t);

}  // namespace capkit::audio

#endif  // CAPKIT_TRANSCRIPT_IO_HPP
