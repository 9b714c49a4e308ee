#pragma once

namespace httplib {
class Server;
}

namespace advis {

class OracleService;

/// Routes:
///   POST /sessions                     create (body: session settings)
///   GET  /sessions                     list
///   GET  /sessions/{id}                status
///   GET  /sessions/{id}/query          outstanding query
///   POST /sessions/{id}/label          {"pixel": p, "class": c}
///   GET  /sessions/{id}/segmentation   label + provenance rasters
///   GET  /sessions/{id}/image          indexed-color BMP of the labels
///   GET  /sessions/{id}/context        false-color composite BMP
void mount_routes(httplib::Server& server, OracleService& service);

} // namespace advis
