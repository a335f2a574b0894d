method chain2(a: int, b: int) returns (r: int)
  ensures r == (a - b) * (a - b)
{
  var t := a - b;
  r := t * t;
}
