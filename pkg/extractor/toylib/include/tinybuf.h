#ifndef TINYBUF_H
#define TINYBUF_H

#include <stddef.h>

typedef struct tinybuf tinybuf;

tinybuf *tb_new(size_t cap);
void tb_free(tinybuf *buf);
int tb_push(tinybuf *buf, const char *data, size_t len);
size_t tb_len(const tinybuf *buf);
const char *tb_data(const tinybuf *buf);
int tb_write_file(const tinybuf *buf, const char *path);
int tb_read_file(tinybuf *buf, const char *path);

#endif
