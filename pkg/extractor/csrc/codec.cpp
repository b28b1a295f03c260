// Thin libavcodec/libavformat bridge: decode H.264 with exported motion
// vectors, and encode grayscale frame stacks with libx264 (B-frames off).
//
// Decoding returns, per frame: picture type, the luma plane, and the raw
// motion-vector records (block geometry in full-pel, motion in units of
// 1/motion_scale pel). Block-to-pixel expansion happens in Python.

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstring>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

extern "C" {
#include <libavcodec/avcodec.h>
#include <libavformat/avformat.h>
#include <libavutil/imgutils.h>
#include <libavutil/motion_vector.h>
#include <libavutil/opt.h>
#include <libavutil/pixdesc.h>
}

namespace py = pybind11;

namespace {

std::string averr(int code) {
    char buf[AV_ERROR_MAX_STRING_SIZE] = {0};
    av_strerror(code, buf, sizeof(buf));
    return std::string(buf);
}

struct DecodedFrame {
    char pict_type;
    py::array_t<uint8_t> luma;
    // one row per MV record: dst_cx, dst_cy, w, h, motion_x, motion_y,
    // motion_scale, source  (dst_* are block centers, full-pel)
    py::array_t<int32_t> mvs;
};

py::array_t<uint8_t> copy_luma(const AVFrame* frame) {
    switch (frame->format) {
        case AV_PIX_FMT_YUV420P:
        case AV_PIX_FMT_YUVJ420P:
        case AV_PIX_FMT_YUV422P:
        case AV_PIX_FMT_YUVJ422P:
        case AV_PIX_FMT_YUV444P:
        case AV_PIX_FMT_YUVJ444P:
        case AV_PIX_FMT_NV12:
        case AV_PIX_FMT_GRAY8:
            break;  // 8-bit formats with the luma plane first
        default:
            throw std::runtime_error(
                std::string("unsupported pixel format ") +
                av_get_pix_fmt_name(static_cast<AVPixelFormat>(frame->format)));
    }
    const int h = frame->height, w = frame->width;
    py::array_t<uint8_t> out({h, w});
    auto buf = out.mutable_unchecked<2>();
    for (int y = 0; y < h; y++)
        std::memcpy(buf.mutable_data(y, 0), frame->data[0] + y * frame->linesize[0], w);
    return out;
}

py::array_t<int32_t> copy_mvs(const AVFrame* frame) {
    const AVFrameSideData* sd = av_frame_get_side_data(frame, AV_FRAME_DATA_MOTION_VECTORS);
    const int n = sd ? int(sd->size / sizeof(AVMotionVector)) : 0;
    py::array_t<int32_t> out({n, 8});
    auto buf = out.mutable_unchecked<2>();
    const AVMotionVector* mvs = sd ? reinterpret_cast<const AVMotionVector*>(sd->data) : nullptr;
    for (int i = 0; i < n; i++) {
        buf(i, 0) = mvs[i].dst_x;
        buf(i, 1) = mvs[i].dst_y;
        buf(i, 2) = int32_t(mvs[i].w);
        buf(i, 3) = int32_t(mvs[i].h);
        buf(i, 4) = mvs[i].motion_x;
        buf(i, 5) = mvs[i].motion_y;
        buf(i, 6) = int32_t(mvs[i].motion_scale);
        buf(i, 7) = mvs[i].source;
    }
    return out;
}

char pict_code(int type) {
    switch (type) {
        case AV_PICTURE_TYPE_I: return 'I';
        case AV_PICTURE_TYPE_P: return 'P';
        case AV_PICTURE_TYPE_B: return 'B';
        default: return '?';
    }
}

std::vector<DecodedFrame> decode_file(const std::string& path) {
    AVFormatContext* fmt = nullptr;
    int rc = avformat_open_input(&fmt, path.c_str(), nullptr, nullptr);
    if (rc < 0) throw std::runtime_error("cannot open " + path + ": " + averr(rc));
    std::unique_ptr<AVFormatContext, void (*)(AVFormatContext*)> fmt_guard(
        fmt, [](AVFormatContext* p) { avformat_close_input(&p); });

    rc = avformat_find_stream_info(fmt, nullptr);
    if (rc < 0) throw std::runtime_error("no stream info: " + averr(rc));

    AVCodec* dec = nullptr;
    int stream_idx = av_find_best_stream(fmt, AVMEDIA_TYPE_VIDEO, -1, -1, &dec, 0);
    if (stream_idx < 0) throw std::runtime_error("no video stream in " + path);

    AVCodecContext* ctx = avcodec_alloc_context3(dec);
    if (!ctx) throw std::runtime_error("cannot allocate decoder");
    std::unique_ptr<AVCodecContext, void (*)(AVCodecContext*)> ctx_guard(
        ctx, [](AVCodecContext* p) { avcodec_free_context(&p); });
    rc = avcodec_parameters_to_context(ctx, fmt->streams[stream_idx]->codecpar);
    if (rc < 0) throw std::runtime_error("codec parameters: " + averr(rc));

    AVDictionary* opts = nullptr;
    av_dict_set(&opts, "flags2", "+export_mvs", 0);
    rc = avcodec_open2(ctx, dec, &opts);
    av_dict_free(&opts);
    if (rc < 0) throw std::runtime_error("cannot open decoder: " + averr(rc));

    std::vector<DecodedFrame> frames;
    AVPacket* pkt = av_packet_alloc();
    AVFrame* frame = av_frame_alloc();
    std::unique_ptr<AVPacket, void (*)(AVPacket*)> pkt_guard(
        pkt, [](AVPacket* p) { av_packet_free(&p); });
    std::unique_ptr<AVFrame, void (*)(AVFrame*)> frame_guard(
        frame, [](AVFrame* p) { av_frame_free(&p); });

    auto drain = [&](bool flush) {
        rc = avcodec_send_packet(ctx, flush ? nullptr : pkt);
        if (rc < 0 && rc != AVERROR_EOF)
            throw std::runtime_error("decode error: " + averr(rc));
        while (true) {
            rc = avcodec_receive_frame(ctx, frame);
            if (rc == AVERROR(EAGAIN) || rc == AVERROR_EOF) break;
            if (rc < 0) throw std::runtime_error("decode error: " + averr(rc));
            frames.push_back({pict_code(frame->pict_type), copy_luma(frame), copy_mvs(frame)});
            av_frame_unref(frame);
        }
    };

    while (av_read_frame(fmt, pkt) >= 0) {
        if (pkt->stream_index == stream_idx) drain(false);
        av_packet_unref(pkt);
    }
    drain(true);
    if (frames.empty()) throw std::runtime_error("no decodable frames in " + path);
    return frames;
}

void encode_gray(const py::array_t<uint8_t>& frames, const std::string& path, int crf,
                 int gop, int fps) {
    if (frames.ndim() != 3) throw std::invalid_argument("frames must be (T, H, W) uint8");
    const int t_count = int(frames.shape(0));
    const int h = int(frames.shape(1)), w = int(frames.shape(2));
    if (t_count < 1) throw std::invalid_argument("need at least one frame");
    if (h % 2 || w % 2) throw std::invalid_argument("frame dims must be even for yuv420p");
    if (crf < 0 || crf > 51) throw std::invalid_argument("crf must be in [0, 51]");

    AVCodec* enc = avcodec_find_encoder_by_name("libx264");
    if (!enc) throw std::runtime_error("libx264 encoder not available");

    AVFormatContext* ofmt = nullptr;
    int rc = avformat_alloc_output_context2(&ofmt, nullptr, nullptr, path.c_str());
    if (rc < 0) throw std::runtime_error("cannot create output: " + averr(rc));
    std::unique_ptr<AVFormatContext, void (*)(AVFormatContext*)> ofmt_guard(
        ofmt, [](AVFormatContext* p) {
            if (p && !(p->oformat->flags & AVFMT_NOFILE) && p->pb) avio_closep(&p->pb);
            avformat_free_context(p);
        });

    AVCodecContext* ctx = avcodec_alloc_context3(enc);
    std::unique_ptr<AVCodecContext, void (*)(AVCodecContext*)> ctx_guard(
        ctx, [](AVCodecContext* p) { avcodec_free_context(&p); });
    ctx->width = w;
    ctx->height = h;
    ctx->pix_fmt = AV_PIX_FMT_YUV420P;
    ctx->time_base = AVRational{1, fps};
    ctx->framerate = AVRational{fps, 1};
    ctx->gop_size = gop;
    ctx->max_b_frames = 0;  // P-frames only past the keyframes
    ctx->thread_count = 1;  // deterministic output
    ctx->refs = 1;          // every inter block references the previous frame
    if (ofmt->oformat->flags & AVFMT_GLOBALHEADER)
        ctx->flags |= AV_CODEC_FLAG_GLOBAL_HEADER;
    av_opt_set_int(ctx->priv_data, "crf", crf, 0);
    av_opt_set(ctx->priv_data, "preset", "medium", 0);
    // No scene-cut keyframes: GOP structure stays I + (gop-1) P even for
    // noisy content, so prediction-based fixtures keep their P-frames.
    av_opt_set_int(ctx->priv_data, "sc_threshold", 0, 0);

    rc = avcodec_open2(ctx, enc, nullptr);
    if (rc < 0) throw std::runtime_error("cannot open encoder: " + averr(rc));

    AVStream* stream = avformat_new_stream(ofmt, nullptr);
    if (!stream) throw std::runtime_error("cannot create stream");
    stream->time_base = ctx->time_base;
    rc = avcodec_parameters_from_context(stream->codecpar, ctx);
    if (rc < 0) throw std::runtime_error("stream parameters: " + averr(rc));

    if (!(ofmt->oformat->flags & AVFMT_NOFILE)) {
        rc = avio_open(&ofmt->pb, path.c_str(), AVIO_FLAG_WRITE);
        if (rc < 0) throw std::runtime_error("cannot open " + path + ": " + averr(rc));
    }
    rc = avformat_write_header(ofmt, nullptr);
    if (rc < 0) throw std::runtime_error("cannot write header: " + averr(rc));

    AVFrame* frame = av_frame_alloc();
    AVPacket* pkt = av_packet_alloc();
    std::unique_ptr<AVFrame, void (*)(AVFrame*)> frame_guard(
        frame, [](AVFrame* p) { av_frame_free(&p); });
    std::unique_ptr<AVPacket, void (*)(AVPacket*)> pkt_guard(
        pkt, [](AVPacket* p) { av_packet_free(&p); });
    frame->format = ctx->pix_fmt;
    frame->width = w;
    frame->height = h;
    rc = av_frame_get_buffer(frame, 0);
    if (rc < 0) throw std::runtime_error("frame buffer: " + averr(rc));

    auto src = frames.unchecked<3>();
    auto pump = [&](AVFrame* f) {
        rc = avcodec_send_frame(ctx, f);
        if (rc < 0) throw std::runtime_error("encode error: " + averr(rc));
        while (true) {
            rc = avcodec_receive_packet(ctx, pkt);
            if (rc == AVERROR(EAGAIN) || rc == AVERROR_EOF) break;
            if (rc < 0) throw std::runtime_error("encode error: " + averr(rc));
            // Stamp a real duration so the mp4 edit list covers the final
            // sample; a zero-duration tail sample gets flagged as discard on
            // demux and the decoder silently drops the last frame.
            pkt->duration = 1;
            av_packet_rescale_ts(pkt, ctx->time_base, stream->time_base);
            pkt->stream_index = stream->index;
            int wrc = av_interleaved_write_frame(ofmt, pkt);
            if (wrc < 0) throw std::runtime_error("write error: " + averr(wrc));
        }
    };

    for (int t = 0; t < t_count; t++) {
        rc = av_frame_make_writable(frame);
        if (rc < 0) throw std::runtime_error("frame not writable: " + averr(rc));
        for (int y = 0; y < h; y++)
            std::memcpy(frame->data[0] + y * frame->linesize[0], src.data(t, y, 0), w);
        for (int y = 0; y < h / 2; y++) {
            std::memset(frame->data[1] + y * frame->linesize[1], 128, w / 2);
            std::memset(frame->data[2] + y * frame->linesize[2], 128, w / 2);
        }
        frame->pts = t;
        pump(frame);
    }
    pump(nullptr);  // flush

    rc = av_write_trailer(ofmt);
    if (rc < 0) throw std::runtime_error("trailer: " + averr(rc));
}

}  // namespace

PYBIND11_MODULE(_codec, m) {
    m.doc() = "libavcodec bridge: H.264 decode with MV side data, libx264 encode";

    // Codec banners and per-encode statistics are noise here; keep stderr
    // for actual problems.
    av_log_set_level(AV_LOG_ERROR);

    py::class_<DecodedFrame>(m, "DecodedFrame")
        .def_property_readonly("pict_type",
                               [](const DecodedFrame& f) { return std::string(1, f.pict_type); })
        .def_readonly("luma", &DecodedFrame::luma)
        .def_readonly("mvs", &DecodedFrame::mvs);

    m.def("decode", &decode_file, py::arg("path"),
          "Decode a video file; returns DecodedFrame list with luma planes and "
          "raw motion-vector records (dst_cx, dst_cy, w, h, motion_x, motion_y, "
          "motion_scale, source).");
    m.def("encode_gray", &encode_gray, py::arg("frames"), py::arg("path"),
          py::arg("crf") = 23, py::arg("gop") = 250, py::arg("fps") = 25,
          "Encode a (T, H, W) uint8 stack as H.264 yuv420p with neutral chroma, "
          "B-frames disabled, single thread.");
}
