#include <stdlib.h>
#include <string.h>

#include "tinybuf.h"

struct tinybuf {
    char *data;
    size_t len;
    size_t cap;
};

/* Internal: not part of the exported API (static, so nm skips it). */
static int grow(tinybuf *buf, size_t need)
{
    size_t cap = buf->cap ? buf->cap : 16;
    char *data;
    while (cap < need)
        cap *= 2;
    data = realloc(buf->data, cap);
    if (!data)
        return -1;
    buf->data = data;
    buf->cap = cap;
    return 0;
}

tinybuf *tb_new(size_t cap)
{
    tinybuf *buf = calloc(1, sizeof(*buf));
    if (!buf)
        return NULL;
    if (cap && grow(buf, cap) != 0) {
        free(buf);
        return NULL;
    }
    return buf;
}

void tb_free(tinybuf *buf)
{
    if (buf) {
        free(buf->data);
        free(buf);
    }
}

int tb_push(tinybuf *buf, const char *data, size_t len)
{
    if (grow(buf, buf->len + len) != 0)
        return -1;
    memcpy(buf->data + buf->len, data, len);
    buf->len += len;
    return 0;
}

size_t tb_len(const tinybuf *buf)
{
    return buf->len;
}

const char *tb_data(const tinybuf *buf)
{
    return buf->data;
}
